"""Pure numerical kernels: photon statistics, channels, detectors, sky background."""
