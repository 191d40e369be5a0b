"""Lacunary direction sets, directional maximal operators and cone multipliers.

The top-level namespace re-exports the public API of the submodules:

- `lacuna.directions`: direction sets, lacunary sequences, partitions, shadows
- `lacuna.certificates`: lacunarity-order certificates
- `lacuna.generators`: named direction families and Kakeya rectangle families
- `lacuna.grid`: sampled functions and radius sets
- `lacuna.maximal`: discrete maximal operators
- `lacuna.raster`: union areas and rasterized Kakeya sets
- `lacuna.multipliers`: cone multipliers and frequency-side checks
"""

__version__ = "0.1.0"

from .certificates import *  # noqa: E402,F401,F403
from .directions import *  # noqa: E402,F401,F403
from .generators import *  # noqa: E402,F401,F403
from .grid import *  # noqa: E402,F401,F403
from .maximal import *  # noqa: E402,F401,F403
from .multipliers import *  # noqa: E402,F401,F403
from .raster import *  # noqa: E402,F401,F403
