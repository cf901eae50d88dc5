"""Sub-seed derivation: one master seed fans out to independent per-task streams."""
import hashlib


def derive_seed(master, module, index=0):
    """Stable 63-bit seed from (master, module name, task index)."""
    key = f"{int(master)}:{module}:{int(index)}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little") >> 1
