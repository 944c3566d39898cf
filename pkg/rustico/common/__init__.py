__package__ = 'rustico.common'

from .errors import *
from .logger import *
from .wheel import *
from .raster import *
from .datasets import *
