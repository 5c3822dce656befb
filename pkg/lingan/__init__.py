from lingan.errors import *
from lingan.linalg import *
from lingan.Gaussian import *
from lingan.metrics import *
from lingan.DataModel import *
from lingan.losses import *
from lingan.trainers import *
from lingan.Config import *
from lingan.experiments import *
import lingan.cli

__version__ = "0.1.0"
