"""
Feature token normalization to handle spelling differences between dataset
releases (e.g. MovieLens `Children's` vs `Children`) and tokens that are not
content features (e.g. the `IMAX` screening format).
"""

import re
import unicodedata
from typing import Dict, Iterable, Optional, Tuple


class FeatureNormalizer:
    """Normalizes feature tokens so vocabularies match across dataset versions"""

    def __init__(self,
                 aliases: Optional[Dict[str, str]] = None,
                 ignored: Iterable[str] = ()):
        """
        Initialize FeatureNormalizer

        Args:
            aliases: Mapping from alternate spelling to canonical token
            ignored: Tokens dropped entirely after aliasing
        """
        # Quote characters seen in older MovieLens exports
        self.char_replacements = {
            '’': "'",
            '‘': "'",
            '`': "'",
        }
        self.aliases = dict(aliases or {})
        self.ignored = frozenset(ignored)

    def normalize_token(self, token: str) -> str:
        """
        Normalize a single feature token

        Args:
            token: Raw token as found in the dataset

        Returns:
            Canonical token, or "" when the token is ignored or blank
        """
        if not isinstance(token, str):
            return ""

        normalized = unicodedata.normalize('NFC', token)
        for old_char, new_char in self.char_replacements.items():
            normalized = normalized.replace(old_char, new_char)
        normalized = re.sub(r'\s+', ' ', normalized).strip()

        normalized = self.aliases.get(normalized, normalized)
        if normalized in self.ignored:
            return ""
        return normalized

    def normalize_features(self, features: Iterable[str]) -> Tuple[str, ...]:
        """
        Normalize a feature list, dropping blanks and duplicates (first wins)

        Args:
            features: Ordered raw feature tokens

        Returns:
            Ordered tuple of distinct canonical tokens
        """
        seen = []
        for token in features:
            normalized = self.normalize_token(token)
            if normalized and normalized not in seen:
                seen.append(normalized)
        return tuple(seen)


# Identity-aliasing instance used by the parsers
feature_normalizer = FeatureNormalizer()
