__package__ = 'rustico.evaluation'

from .metrics import *
from .significance import *
from .report import *
