# src/utils/state_persistence.py

import json
import os
from datetime import datetime
from typing import Any, Dict, Optional

from ..ncm.model import Ncm
from .logger import RunLogger
from .seeding import sha512_hex

FORMAT_VERSION = 1


def _canonical(payload: Dict[str, Any]) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(',', ':')).encode('utf-8')


class StatePersistence:
    """
    Persistence of trained models as digest-checked JSON checkpoints.

    A checkpoint holds the model payload (graph text, per-variable network
    parameters, architecture) plus a SHA-512 digest of its canonical
    encoding, verified on load. Float parameters survive the JSON round
    trip exactly.
    """

    def __init__(self, logger: Optional[RunLogger] = None):
        """
        Args:
            logger: Receives one line per save or load attempt
        """
        self.logger = logger or RunLogger(echo=False)

    def save_state(self, payload: Dict[str, Any], filepath: str,
                   metadata: Optional[Dict[str, Any]] = None) -> bool:
        """
        Write a checkpoint.

        Args:
            payload: JSON-serializable model state (e.g. `Ncm.to_dict()`)
            filepath: Destination file
            metadata: Extra provenance stored next to the payload

        Returns:
            True on success; failures are logged, not raised
        """
        try:
            document = {
                'version': FORMAT_VERSION,
                'timestamp': datetime.now().isoformat(),
                'metadata': metadata or {},
                'payload': payload,
                'digest': sha512_hex(_canonical(payload)),
            }
            directory = os.path.dirname(filepath)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(filepath, 'w') as f:
                json.dump(document, f)
            self.logger.log_operation("SAVE_STATE", filepath, True,
                                      f"digest {document['digest'][:16]}")
            return True
        except (OSError, TypeError, ValueError) as e:
            self.logger.log_operation("SAVE_STATE", filepath, False, f"Error: {e}")
            return False

    def load_state(self, filepath: str) -> Optional[Dict[str, Any]]:
        """
        Read a checkpoint and verify its digest.

        Returns:
            The stored payload, or None if the file is missing, unreadable,
            of another format version, or fails the digest check
        """
        try:
            with open(filepath) as f:
                document = json.load(f)
            if document.get('version') != FORMAT_VERSION:
                raise ValueError(f"unsupported checkpoint version {document.get('version')}")
            payload = document['payload']
            if sha512_hex(_canonical(payload)) != document['digest']:
                raise ValueError("digest mismatch")
            self.logger.log_operation("LOAD_STATE", filepath, True,
                                      f"saved {document['timestamp']}")
            return payload
        except (OSError, KeyError, ValueError) as e:
            self.logger.log_operation("LOAD_STATE", filepath, False, f"Error: {e}")
            return None

    def save_ncm(self, ncm: Ncm, filepath: str, metadata: Optional[Dict[str, Any]] = None) -> bool:
        return self.save_state(ncm.to_dict(), filepath, metadata)

    def load_ncm(self, filepath: str) -> Optional[Ncm]:
        """The stored Ncm, or None (see `load_state`)."""
        payload = self.load_state(filepath)
        if payload is None:
            return None
        try:
            return Ncm.from_dict(payload)
        except (KeyError, ValueError) as e:
            self.logger.log_operation("LOAD_STATE", filepath, False, f"Error: {e}")
            return None
