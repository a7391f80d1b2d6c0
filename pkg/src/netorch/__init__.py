"""netorch: centralized orchestration for mixed cloud / SDN / router fleets."""

__version__ = "0.1.0"
