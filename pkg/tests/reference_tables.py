"""Published rate-table cells used as frozen oracles (None marks a hyphen)."""

# (c, ell) -> (alpha, beta, NE, PT, PI)
TAIL_RATES_HEAVY = {
    (0.5, 0.5): (0.25, 0.5, None, -0.8, -1.6),
    (1.0, 0.5): (0.5, 1.0, None, -0.8, -1.6),
    (3.0, 0.5): (1.5, 3.0, -0.8, -0.8, -1.6),
    (0.5, 1.0): (0.5, 0.5, None, -0.667, -1.333),
    (1.0, 1.0): (1.0, 1.0, None, -0.667, -1.333),
    (3.0, 1.0): (3.0, 3.0, -0.667, -0.667, -1.333),
    (0.5, 3.0): (1.5, 0.5, None, -0.4, -0.8),
    (1.0, 3.0): (3.0, 1.0, None, -0.4, -0.8),
    (3.0, 3.0): (9.0, 3.0, -0.4, -0.4, -0.8),
}

# (kappa, C, C2) -> shared NE/PT exponent
TAIL_RATES_LIGHT = {
    (0.5, 1.0, 0.2): -0.553,
    (1.0, 1.0, 0.2): -0.8,
    (3.0, 1.0, 0.2): -0.992,
    (10.0, 1.0, 0.2): -1.000,
    (0.5, 1.0, 1.0 / 3.0): -0.423,
    (1.0, 1.0, 1.0 / 3.0): -0.667,
    (3.0, 1.0, 1.0 / 3.0): -0.963,
    (10.0, 1.0, 1.0 / 3.0): -1.000,
    (0.5, 1.0, 0.5): -0.293,
    (1.0, 1.0, 0.5): -0.5,
    (3.0, 1.0, 0.5): -0.875,
    (10.0, 1.0, 0.5): -0.999,
}

# (c, ell) -> tuple over u = n^(1/16), n^(1/8), n^(1/4), n^(3/8) of (NE, PT, PI)
MEF_RATES = {
    (0.5, 0.5): ((-0.859, None, -0.675), (-0.719, None, -0.55),
                 (-0.438, None, -0.3), (None, None, -0.05)),
    (1.0, 0.5): ((-0.844, None, -0.675), (-0.688, None, -0.55),
                 (-0.375, None, -0.3), (None, None, -0.05)),
    (3.0, 0.5): ((-0.781, None, -0.675), (-0.563, None, -0.55),
                 (None, -0.125, -0.3), (None, 0.313, -0.05)),
    (0.5, 1.0): ((-0.844, None, -0.542), (-0.688, None, -0.417),
                 (-0.375, None, -0.167), (None, None, 0.083)),
    (1.0, 1.0): ((-0.813, None, -0.542), (-0.625, None, -0.417),
                 (-0.25, None, -0.167), (None, 0.125, 0.083)),
    (3.0, 1.0): ((-0.688, None, -0.542), (-0.375, -0.375, -0.417),
                 (None, 0.25, -0.167), (None, 0.875, 0.083)),
    (0.5, 3.0): ((-0.781, None, -0.275), (-0.563, None, -0.15),
                 (None, None, 0.1), (None, None, 0.35)),
    (1.0, 3.0): ((-0.688, None, -0.275), (-0.375, None, -0.15),
                 (None, 0.25, 0.1), (None, 0.875, 0.35)),
    (3.0, 3.0): ((-0.313, None, -0.275), (None, 0.375, -0.15),
                 (None, 1.75, 0.1), (None, 3.125, 0.35)),
}

# printed cells carry three decimals; ties in the source rounded away from zero
PRINT_TOL = 5.0001e-4


def matches_printed(value, printed) -> bool:
    if printed is None:
        return value is None
    if value is None:
        return False
    return abs(value - printed) <= PRINT_TOL
