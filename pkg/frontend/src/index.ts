export { ApiClient, ApiError } from "./client.js";
export type { FetchLike } from "./client.js";
export {
  EMPTY_FORM,
  buildPayload,
  submitState,
  validateForm,
} from "./provisionForm.js";
export type { ProvisionFormState, SubmitState } from "./provisionForm.js";
export { EventFeed, formatEvent, pollEvents } from "./eventFeed.js";
export {
  buildTimeline,
  renderTimeline,
  spawnBeforeDisable,
} from "./failoverTimeline.js";
export type { TimelineEntry } from "./failoverTimeline.js";
export {
  renderDevices,
  renderEvents,
  renderInstances,
  renderPolicies,
  renderRib,
  renderTaskResult,
} from "./pages.js";
export * from "./types.js";
