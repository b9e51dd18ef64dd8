from .density import LENGTH, StepDensity, cut_equal, evaluate, mark, select_extreme
