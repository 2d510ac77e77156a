"""Width integrals, Orlicz width additions and numerical checks of their inequalities."""

__version__ = "0.1.0"

from .addition import (  # noqa: E402
    lp_width_sum,
    orlicz_linear_combination,
    orlicz_width_sum,
    solve_lambda,
)
from .errors import InputError, NumericError, WidthlabError  # noqa: E402
from .functionals import (  # noqa: E402
    ith_mixed_width,
    lp_mixed_width,
    mixed_width_integral,
    orlicz_mixed_width,
    width_integral,
    width_measure_weights,
)
from .geometry import (  # noqa: E402
    Ball,
    Ellipsoid,
    LinearImage,
    Polytope,
    WidthProfile,
    half_width,
    linear_image,
    support,
    validate_body,
    width_profile,
)
from .orlicz import Mixture, Power, SumOfUnivariate, validate_phi  # noqa: E402
from .sphere_quad import build_rule, integrate  # noqa: E402
