"""Sign-language tutoring toolkit: vision front end, per-sign HMM banks,
sequential manual/non-manual fusion, and a practice-feedback service."""

__version__ = "0.1.0"
