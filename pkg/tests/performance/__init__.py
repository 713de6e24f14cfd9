"""Performance tests for the LPCMCI engine."""
