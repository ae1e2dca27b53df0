# Bandit agents

from .base import AgentSpec, BanditAgent
from .linear import LinUCBAgent, SoftmaxPolicyAgent
from .registry import AGENT_NAMES, make_agent
from .tabular import EpsilonGreedyAgent, OracleAgent, UniformAgent

__all__ = [
    'AgentSpec',
    'BanditAgent',
    'LinUCBAgent',
    'SoftmaxPolicyAgent',
    'EpsilonGreedyAgent',
    'OracleAgent',
    'UniformAgent',
    'AGENT_NAMES',
    'make_agent',
]
