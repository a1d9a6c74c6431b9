"""Service layer providing validated, logged wrappers around the physics kernels."""
