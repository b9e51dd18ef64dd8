# Chore division engine configuration
from .settings import *
