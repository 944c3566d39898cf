__package__ = 'rustico.pytorch'

from .utils import *
