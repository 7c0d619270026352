DELTA = 0.001
STOP_XI = -20.0
TOL = 1e-10
HORIZON = 50.0

NORM_CEILING = 1e8
COLLAPSE_FLOOR = 1e-10
CRITICAL_RADIUS = 1e-8
ATLAS_CRITICAL_RADIUS = 1e-3
TOL_CONE = 1e-2
CONE_SLACK = 1e-12

GUARD = 1e-13
ALPHA_ATOL = 1e-12
MAX_DELTA = 0.01
MIN_TOL = 1e-13
MAX_TOL = 1e-6

ROOT_BRACKET = (-20.0, 20.0)
ROOT_SCAN_STEP = 1e-3
ROOT_XTOL = 1e-12
CROSSING_XTOL = 1e-12
BISECTION_TOL = 1e-3
EINSTEIN_WINDOW = 1.0
