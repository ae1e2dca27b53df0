# Contextual Bandit Environments - Source Package
