import hashlib
import logging
import numbers
import typing as t

import attr
import numpy as np

_NONE_MARKER = "tilekit-none".encode("utf16")


def int_to_bytes(number: int) -> bytes:
    return number.to_bytes(
        length=(8 + (number + (number < 0)).bit_length()) // 8,
        byteorder="big",
        signed=True,
    )


def _update_with_array(array: np.ndarray, hash_object):
    array = np.ascontiguousarray(array)
    hash_object.update(array.dtype.str.encode("utf16"))
    for size in array.shape:
        hash_object.update(int_to_bytes(size))
    hash_object.update(array.tobytes())


def session_consistent_hash(obj: t.Any, hash_object=None) -> int:
    """
    Hash of scenarios, tiles, report inputs and other plain data which must be consistent
    across python sessions (python randomises its string hashes). Numpy arrays are hashed
    by dtype, shape and raw bytes, attrs instances by their field values.
    """
    if hash_object is None:
        hash_object = hashlib.md5()
    if isinstance(obj, str):
        hash_object.update(obj.encode("utf16"))
    elif isinstance(obj, (bool, int, np.integer)):
        hash_object.update(int_to_bytes(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        hash_object.update(float(obj).hex().encode("utf16"))
    elif isinstance(obj, numbers.Complex):
        hash_object.update(complex(obj).real.hex().encode("utf16"))
        hash_object.update(complex(obj).imag.hex().encode("utf16"))
    elif isinstance(obj, np.ndarray):
        _update_with_array(obj, hash_object)
    elif attr.has(type(obj)):
        hash_object.update(type(obj).__name__.encode("utf16"))
        for field in attr.fields(type(obj)):
            session_consistent_hash(field.name, hash_object=hash_object)
            session_consistent_hash(getattr(obj, field.name), hash_object=hash_object)
    elif isinstance(obj, t.Mapping):
        for key, value in obj.items():
            session_consistent_hash(key, hash_object=hash_object)
            session_consistent_hash(value, hash_object=hash_object)
    elif isinstance(obj, t.Sequence):
        for value in obj:
            session_consistent_hash(value, hash_object=hash_object)
    elif isinstance(obj, t.AbstractSet):
        # hashing each element with a fresh md5 gives an order that does not depend
        # on the session, which we then feed into the final hash.
        session_consistent_hash(
            sorted("%x" % session_consistent_hash(x, hash_object=None) for x in obj),
            hash_object=hash_object,
        )
    elif obj is None:
        hash_object.update(_NONE_MARKER)
    else:
        logging.getLogger(__name__).debug(
            f"Object {obj} of type {type(obj)} is being hashed with pythons "
            f"native hash algorithm which may not be consistent across sessions."
        )
        hash_object.update(("%x" % hash(obj)).encode("utf16"))
    # restricted to signed 64 bit so digests survive any json/csv consumer
    return int(hash_object.hexdigest(), 16) % 9223372036854775807


def digest(obj: t.Any) -> str:
    """
    Fixed width hex rendering of session_consistent_hash, used in reports and file names.
    """
    return "%016x" % session_consistent_hash(obj)
