__package__ = 'rustico'

__version__ = '0.1.0'

from .common import *
from .pytorch import *
from .filters import *
from .evaluation import *
from .config import *
from .commands import *
