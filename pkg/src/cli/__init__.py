from .commands import build_parser, cmd_gen, cmd_run, cmd_verify, format_summary, main, summary_frame
from .generate import generate_densities, random_density
