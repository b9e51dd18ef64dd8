from .params import Params, derive_params
from .state import Allocation, Certificate, Event, IASet, Transcript
from .engine import ChoreDivision, Done, Objection, RoundResult, RunConfig, run
