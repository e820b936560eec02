from .data import register as register_data  # noqa: F401
from .evaluate import register as register_evaluate  # noqa: F401
from .learn import register as register_learn  # noqa: F401
from .maps import register as register_maps  # noqa: F401
from .reproduce import register as register_reproduce  # noqa: F401
