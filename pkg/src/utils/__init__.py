# Utility modules: seeds, feature normalization, logging
