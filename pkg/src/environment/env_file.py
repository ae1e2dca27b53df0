"""
Environment File Format

A `.cbe` file is three newline-terminated UTF-8 lines:

    CBE 1
    <payload: canonical JSON, sorted keys, no whitespace>
    sha256:<hex digest of the payload line bytes>

Matrix entries and the normalization range are stored as `float.hex()`
strings, so values survive the round trip bit for bit in any language with a
hex-float parser. Re-saving a loaded environment reproduces the same bytes.
"""

from pathlib import Path
from typing import Any, Dict, List, Union
import hashlib
import json
import logging

import numpy as np

from ..errors import ChecksumError, EnvironmentFileError, FormatVersionError, TruncatedFileError
from ..utils.rng import RNG_ALGORITHM, SEED_DERIVATION
from .bandit_env import BanditEnvironment, Provenance, SamplerConfig, build
from .encoder import ActionSet, FeatureVocabulary, StateSet
from .reward import transform_from_dict, transform_to_dict

logger = logging.getLogger(__name__)

MAGIC = "CBE"
FORMAT_VERSION = 1
CHECKSUM_PREFIX = "sha256:"


def _encode_matrix(matrix: np.ndarray) -> List[List[str]]:
    return [[float(v).hex() for v in row] for row in matrix]


def _decode_matrix(rows: List[List[str]], columns: int) -> np.ndarray:
    if not rows:
        return np.zeros((0, columns), dtype=np.float64)
    return np.array([[float.fromhex(v) for v in row] for row in rows], dtype=np.float64)


def _payload(env: BanditEnvironment) -> Dict[str, Any]:
    return {
        'format_version': FORMAT_VERSION,
        'rng': {'algorithm': RNG_ALGORITHM, 'seed_derivation': SEED_DERIVATION},
        'vocabulary': list(env.actions.vocabulary.features),
        'actions': {
            'item_ids': list(env.actions.item_ids),
            'titles': list(env.actions.titles),
            'matrix': _encode_matrix(env.actions.matrix),
        },
        'states': {
            'user_ids': list(env.states.user_ids),
            'norm_range': [float(v).hex() for v in env.states.norm_range],
            'matrix': _encode_matrix(env.states.matrix),
        },
        'transform': transform_to_dict(env.transform),
        'sampler': env.sampler.to_dict(),
        'provenance': env.provenance.to_dict(),
    }


def dumps(env: BanditEnvironment) -> bytes:
    """Serialize an environment to the versioned, checksummed byte form"""
    payload = json.dumps(_payload(env), sort_keys=True, separators=(',', ':'), ensure_ascii=False)
    payload_bytes = payload.encode('utf-8')
    digest = hashlib.sha256(payload_bytes).hexdigest()
    header = f"{MAGIC} {FORMAT_VERSION}\n".encode('utf-8')
    return header + payload_bytes + b"\n" + f"{CHECKSUM_PREFIX}{digest}\n".encode('utf-8')


def save(env: BanditEnvironment, path: Union[str, Path]) -> Path:
    """
    Write an environment file

    Args:
        env: Environment to save
        path: Destination (conventionally *.cbe)

    Returns:
        Path written
    """
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    data = dumps(env)
    path.write_bytes(data)
    logger.info(f"Saved environment to {path} ({len(data)} bytes)")
    return path


def loads(data: bytes, origin: str = "<bytes>") -> BanditEnvironment:
    """
    Parse the byte form produced by dumps

    Raises:
        FormatVersionError: Unknown magic string or version
        TruncatedFileError: Missing lines or missing final newline
        ChecksumError: Payload digest mismatch
        EnvironmentFileError: Payload is not a valid environment
    """
    if not data:
        raise TruncatedFileError(f"{origin}: empty environment file")

    header, _, rest = data.partition(b"\n")
    parts = header.decode('utf-8', errors='replace').split(' ')
    if len(parts) != 2 or parts[0] != MAGIC:
        raise FormatVersionError(f"{origin}: not an environment file (bad magic line)")
    try:
        version = int(parts[1])
    except ValueError:
        raise FormatVersionError(f"{origin}: unreadable format version '{parts[1]}'")
    if version != FORMAT_VERSION:
        raise FormatVersionError(f"{origin}: format version {version} is not supported (expected {FORMAT_VERSION})")

    payload_bytes, newline, checksum_line = rest.partition(b"\n")
    if not newline or not checksum_line.endswith(b"\n") or checksum_line.count(b"\n") != 1:
        raise TruncatedFileError(f"{origin}: environment file is truncated")

    recorded = checksum_line[:-1].decode('utf-8', errors='replace')
    if not recorded.startswith(CHECKSUM_PREFIX):
        raise TruncatedFileError(f"{origin}: checksum line missing")
    actual = hashlib.sha256(payload_bytes).hexdigest()
    if recorded[len(CHECKSUM_PREFIX):] != actual:
        raise ChecksumError(f"{origin}: checksum mismatch, file is corrupted")

    try:
        payload = json.loads(payload_bytes.decode('utf-8'))
        return _from_payload(payload)
    except (KeyError, TypeError, ValueError) as e:
        raise EnvironmentFileError(f"{origin}: malformed payload: {e}") from e


def _from_payload(payload: Dict[str, Any]) -> BanditEnvironment:
    vocabulary = FeatureVocabulary(tuple(payload['vocabulary']))
    actions = ActionSet(
        matrix=_decode_matrix(payload['actions']['matrix'], len(vocabulary)),
        item_ids=tuple(payload['actions']['item_ids']),
        titles=tuple(payload['actions']['titles']),
        vocabulary=vocabulary,
    )
    states = StateSet(
        matrix=_decode_matrix(payload['states']['matrix'], len(vocabulary)),
        user_ids=tuple(payload['states']['user_ids']),
        norm_range=tuple(float.fromhex(v) for v in payload['states']['norm_range']),
        vocabulary=vocabulary,
    )
    rng = payload.get('rng', {})
    if rng.get('algorithm') != RNG_ALGORITHM:
        logger.warning(f"Environment was written with RNG '{rng.get('algorithm')}', this build uses {RNG_ALGORITHM}")

    return build(
        states=states,
        actions=actions,
        transform=transform_from_dict(payload['transform']),
        sampler=SamplerConfig(**payload['sampler']),
        provenance=Provenance.from_dict(payload['provenance']),
    )


def load(path: Union[str, Path]) -> BanditEnvironment:
    """
    Read an environment file written by save

    Args:
        path: Environment file

    Returns:
        BanditEnvironment

    Raises:
        EnvironmentFileError: Unreadable, corrupted, truncated or wrong-version file
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise EnvironmentFileError(f"Cannot read environment file {path}: {e}") from e
    env = loads(data, origin=str(path))
    logger.info(f"Loaded environment from {path}")
    return env
