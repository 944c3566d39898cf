__package__ = 'rustico.filters'

from .dog import *
from .cosfire import *
from .push_pull import *
