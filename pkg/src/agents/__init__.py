from .agent import Agent, Augmentation, minimum_r, removal_count
