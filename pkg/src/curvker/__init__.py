"""Kernel permutations, Menger curvature and sign thresholds for the K_t kernel family."""
