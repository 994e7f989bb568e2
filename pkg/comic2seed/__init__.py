__version__ = '0.1.0'
from .utils import *
from .graph import *
from .gaps import *
from .model import *
from .world import *
from .rrset import *
from .tim import *
from .sandwich import *
from .baselines import *
from .learn import *
from .config import *
