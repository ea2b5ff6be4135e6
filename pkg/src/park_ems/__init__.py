"""Industrial-park energy management: simulator, DDPG learner and rule baselines."""

__version__ = "0.1.0"
