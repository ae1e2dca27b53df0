"""
Agent registry: name -> constructor
"""

from typing import Any, Dict

from ..environment.bandit_env import BanditEnvironment
from ..errors import ConfigError
from .base import AgentSpec, BanditAgent
from .linear import LinUCBAgent, SoftmaxPolicyAgent
from .tabular import EpsilonGreedyAgent, OracleAgent, UniformAgent

AGENT_NAMES = ("uniform", "egreedy", "linucb", "softmax", "oracle")

# Accepted hyperparameters and their types
AGENT_PARAMS: Dict[str, Dict[str, type]] = {
    "uniform": {},
    "egreedy": {"epsilon": float},
    "linucb": {"beta": float, "ridge": float, "normalize_context": bool, "warm_start": bool},
    "softmax": {"learning_rate": float, "normalize_context": bool},
    "oracle": {},
}


def _coerce(name: str, key: str, value: Any, kind: type) -> Any:
    if kind is bool and isinstance(value, str):
        lowered = value.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: '{key}' expects a boolean, got '{value}'")
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: '{key}' expects {kind.__name__}, got '{value}'")


def make_agent(spec: AgentSpec, env: BanditEnvironment, seed: int) -> BanditAgent:
    """
    Instantiate an agent for an environment

    Args:
        spec: Agent name and hyperparameters
        env: Environment (action count, dimension, oracle access)
        seed: Agent seed

    Returns:
        Fresh agent instance

    Raises:
        ConfigError: Unknown agent name or hyperparameter
    """
    if spec.name not in AGENT_NAMES:
        raise ConfigError(f"Unknown agent '{spec.name}', valid agents: {', '.join(AGENT_NAMES)}")

    accepted = AGENT_PARAMS[spec.name]
    unknown = sorted(set(spec.params) - set(accepted))
    if unknown:
        raise ConfigError(
            f"Agent '{spec.name}' does not accept {unknown}; accepted: {sorted(accepted) or 'none'}"
        )
    params = {key: _coerce(spec.name, key, value, accepted[key]) for key, value in spec.params.items()}

    if spec.name == "oracle":
        return OracleAgent(env, seed=seed)
    agent_type = {
        "uniform": UniformAgent,
        "egreedy": EpsilonGreedyAgent,
        "linucb": LinUCBAgent,
        "softmax": SoftmaxPolicyAgent,
    }[spec.name]
    return agent_type(env.num_actions, env.dimension, seed=seed, **params)
