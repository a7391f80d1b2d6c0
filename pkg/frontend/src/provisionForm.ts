// Provision form: state, client-side validation mirroring the server's
// InstanceSpec invariants, and deterministic payload serialization.
//
// The documented POST /instances payload has exactly these keys in exactly
// this order:
//
//   {"host": ..., "tenant": ..., "count": ..., "type": ..., "kind": ...,
//    "validate": ..., "fresh_install": ...}
//
// buildPayload() emits that shape byte-for-byte (JSON.stringify of an
// object literal preserves insertion order for string keys).

import { INSTANCE_TYPES, VM_ONLY_TYPES } from "./types.js";
import type { InstanceKind, InstanceType } from "./types.js";

export interface ProvisionFormState {
  host: string;
  tenant: string;
  count: number;
  type: InstanceType | "";
  kind: InstanceKind | "";
  validate: boolean;
  freshInstall: boolean;
}

export const EMPTY_FORM: ProvisionFormState = {
  host: "",
  tenant: "",
  count: 1,
  type: "",
  kind: "",
  validate: false,
  freshInstall: false,
};

export interface ValidationResult {
  valid: boolean;
  errors: string[]; // one human-readable message per violated invariant
}

// Client-side mirror of InstanceSpec's invariants.  The server re-checks
// everything; this only exists so the submit button can be disabled with a
// message before a doomed request is made.
export function validateForm(form: ProvisionFormState): ValidationResult {
  const errors: string[] = [];
  if (form.host.trim() === "") errors.push("host is required");
  if (form.tenant.trim() === "") errors.push("tenant is required");
  if (!Number.isInteger(form.count) || form.count < 1) {
    errors.push("count must be a whole number >= 1");
  }
  if (form.type === "") {
    errors.push("instance type is required");
  } else if (!(INSTANCE_TYPES as readonly string[]).includes(form.type)) {
    errors.push(`unknown instance type "${form.type}"`);
  }
  if (form.kind === "") {
    errors.push("kind is required");
  } else if (form.kind !== "vm" && form.kind !== "container") {
    errors.push(`unknown kind "${form.kind}"`);
  }
  if (
    form.type !== "" &&
    form.kind === "container" &&
    VM_ONLY_TYPES.has(form.type)
  ) {
    errors.push(`${form.type} can only be deployed as a vm`);
  }
  return { valid: errors.length === 0, errors };
}

// Serialize a *valid* form to the exact documented request body.
export function buildPayload(form: ProvisionFormState): string {
  const check = validateForm(form);
  if (!check.valid) {
    throw new Error(`form is invalid: ${check.errors.join("; ")}`);
  }
  return JSON.stringify({
    host: form.host,
    tenant: form.tenant,
    count: form.count,
    type: form.type,
    kind: form.kind,
    validate: form.validate,
    fresh_install: form.freshInstall,
  });
}

export interface SubmitState {
  disabled: boolean;
  message: string; // shown next to the submit button
}

export function submitState(form: ProvisionFormState): SubmitState {
  const check = validateForm(form);
  if (check.valid) return { disabled: false, message: "" };
  return { disabled: true, message: check.errors[0] };
}
