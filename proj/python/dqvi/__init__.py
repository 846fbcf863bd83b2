from dqvi._dqvi import *  # noqa: F401,F403
