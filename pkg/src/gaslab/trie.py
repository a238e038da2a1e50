"""Merkle-Patricia trie over a content-addressed node store.

Nodes are RLP-shaped lists: leaf/extension nodes are ``[hex-prefix path,
value-or-ref]``, branch nodes have 16 child refs plus a value slot. A child
ref is the node structure itself when its encoding is shorter than 32 bytes,
otherwise the keccak-256 digest of the encoding. Keys are keccak-hashed
before path conversion (secure mode, default) so paths distribute uniformly;
unit tests may switch that off to build tries with known shapes.

Concurrency contract: single writer, multiple readers. Mutations require
exclusive access; the structure does no internal locking.
"""

from __future__ import annotations

import struct
from collections import OrderedDict
from typing import BinaryIO, Optional

from .keccak import keccak_256
from . import rlp

EMPTY_REF = b""
EMPTY_ROOT = keccak_256(rlp.encode(b""))

# Sized to hold every hot key of a desk-scale run; clearing mid-run would
# inject rehash latency spikes into lookup timings.
_KEY_PATH_CACHE_CAP = 1 << 18


class CorruptStoreError(KeyError):
    """A node referenced by hash is missing from the backing store."""


# ---------------------------------------------------------------------------
# Nibble paths and hex-prefix encoding
# ---------------------------------------------------------------------------

def bytes_to_nibbles(data: bytes) -> list[int]:
    out = []
    for b in data:
        out.append(b >> 4)
        out.append(b & 0x0F)
    return out


def hex_prefix_encode(nibbles: list[int], is_leaf: bool) -> bytes:
    """Canonical Ethereum hex-prefix encoding of a partial path."""
    flag = 2 if is_leaf else 0
    if len(nibbles) % 2:
        prefixed = [flag + 1] + list(nibbles)
    else:
        prefixed = [flag, 0] + list(nibbles)
    return bytes((prefixed[i] << 4) | prefixed[i + 1]
                 for i in range(0, len(prefixed), 2))


def hex_prefix_decode(data: bytes) -> tuple[list[int], bool]:
    nibbles = bytes_to_nibbles(data)
    flag = nibbles[0]
    rest = nibbles[1:] if flag & 1 else nibbles[2:]
    return rest, bool(flag & 2)


# ---------------------------------------------------------------------------
# Node store
# ---------------------------------------------------------------------------

class NodeStore:
    """Content-addressed map from node hash to node encoding.

    Re-inserting an identical node is a no-op. An optional bounded LRU read
    cache (capacity 0 disables it) sits in front of the backing dict; reads
    and writes are counted and reported to an optional work meter.
    """

    def __init__(self, cache_capacity: int = 0, meter=None):
        self._data: dict[bytes, bytes] = {}
        self._cache: OrderedDict[bytes, bytes] = OrderedDict()
        self._cache_capacity = cache_capacity
        self.meter = meter
        self.reads = 0
        self.writes = 0

    def __len__(self) -> int:
        return len(self._data)

    def keys(self):
        return self._data.keys()

    def get(self, key: bytes) -> bytes:
        self.reads += 1
        if self._cache_capacity:
            cached = self._cache.get(key)
            if cached is not None:
                self._cache.move_to_end(key)
                if self.meter is not None:
                    self.meter.node_read(cached=True)
                return cached
        try:
            value = self._data[key]
        except KeyError:
            raise CorruptStoreError(key.hex()) from None
        if self._cache_capacity:
            self._cache[key] = value
            if len(self._cache) > self._cache_capacity:
                self._cache.popitem(last=False)
        if self.meter is not None:
            self.meter.node_read(cached=False)
        return value

    def put(self, key: bytes, value: bytes) -> None:
        self.writes += 1
        self._data[key] = value
        if self._cache_capacity and key in self._cache:
            self._cache[key] = value
        if self.meter is not None:
            self.meter.node_write(len(value))

    def dump(self, fp: BinaryIO) -> None:
        """Write all records as big-endian length-prefixed (key, encoding)."""
        for key in sorted(self._data):
            value = self._data[key]
            fp.write(struct.pack(">I", len(key)))
            fp.write(key)
            fp.write(struct.pack(">I", len(value)))
            fp.write(value)

    @classmethod
    def load(cls, fp: BinaryIO, cache_capacity: int = 0) -> "NodeStore":
        store = cls(cache_capacity=cache_capacity)
        while True:
            header = fp.read(4)
            if not header:
                break
            if len(header) < 4:
                raise ValueError("truncated store file")
            key = fp.read(struct.unpack(">I", header)[0])
            (vlen,) = struct.unpack(">I", fp.read(4))
            store._data[key] = fp.read(vlen)
        return store


# ---------------------------------------------------------------------------
# Trie
# ---------------------------------------------------------------------------

class MerklePatriciaTrie:
    """Byte-keyed trie with deterministic keccak-256 root hashes."""

    def __init__(self, store: Optional[NodeStore] = None, secure: bool = True,
                 root_hash: Optional[bytes] = None):
        self.store = store if store is not None else NodeStore()
        self.secure = secure
        self._key_path_cache: dict[bytes, list[int]] = {}
        self.last_lookup_depth = 0
        self.key_count = 0
        if root_hash is None or root_hash == EMPTY_ROOT:
            self._root_ref: rlp.RlpItem = EMPTY_REF
        else:
            self._root_ref = root_hash

    # -- public interface ---------------------------------------------------

    def root_hash(self) -> bytes:
        if self._root_ref == EMPTY_REF:
            return EMPTY_ROOT
        return self._root_ref  # mutations always leave a hashed root

    def get(self, key: bytes) -> Optional[bytes]:
        """Value last inserted for key, or None. Sets `last_lookup_depth`."""
        reads_before = self.store.reads
        value = self._get(self._root_ref, self._path_of(key))
        self.last_lookup_depth = self.store.reads - reads_before
        return value

    def insert(self, key: bytes, value: bytes) -> None:
        """Insert or update; an empty value is a delete request."""
        if value == b"":
            self.delete(key)
            return
        ref, created = self._insert(self._root_ref, self._path_of(key), value)
        self._root_ref = self._commit_root(ref)
        if created:
            self.key_count += 1

    def delete(self, key: bytes) -> None:
        ref, deleted = self._delete(self._root_ref, self._path_of(key))
        self._root_ref = self._commit_root(ref)
        if deleted:
            self.key_count -= 1

    # -- internals ----------------------------------------------------------

    def _path_of(self, key: bytes) -> list[int]:
        if not self.secure:
            return bytes_to_nibbles(key)
        path = self._key_path_cache.get(key)
        if path is None:
            path = bytes_to_nibbles(keccak_256(key))
            if len(self._key_path_cache) >= _KEY_PATH_CACHE_CAP:
                self._key_path_cache.clear()
            self._key_path_cache[key] = path
        if self.store.meter is not None:
            self.store.meter.key_hash()
        return path

    def _resolve(self, ref: rlp.RlpItem) -> Optional[list]:
        if ref == EMPTY_REF:
            return None
        if isinstance(ref, list):
            return ref
        decoded = rlp.decode(self.store.get(ref))
        assert isinstance(decoded, list)
        return decoded

    def _store_node(self, node: list, force_hash: bool = False) -> rlp.RlpItem:
        encoded = rlp.encode(node)
        if len(encoded) < 32 and not force_hash:
            return node
        digest = keccak_256(encoded)
        self.store.put(digest, encoded)
        return digest

    def _commit_root(self, ref: rlp.RlpItem) -> rlp.RlpItem:
        """Root nodes are always stored by hash so tries survive dump/load."""
        if ref == EMPTY_REF:
            return EMPTY_REF
        if isinstance(ref, list):
            return self._store_node(ref, force_hash=True)
        return ref

    def _get(self, ref: rlp.RlpItem, path: list[int]) -> Optional[bytes]:
        node = self._resolve(ref)
        if node is None:
            return None
        if len(node) == 17:
            if not path:
                return node[16] if node[16] != b"" else None
            return self._get(node[path[0]], path[1:])
        node_path, is_leaf = hex_prefix_decode(node[0])
        if is_leaf:
            return node[1] if node_path == path else None
        if path[:len(node_path)] != node_path:
            return None
        return self._get(node[1], path[len(node_path):])

    def _insert(self, ref: rlp.RlpItem, path: list[int],
                value: bytes) -> tuple[rlp.RlpItem, bool]:
        node = self._resolve(ref)
        if node is None:
            leaf = [hex_prefix_encode(path, True), value]
            return self._store_node(leaf), True

        if len(node) == 17:
            if not path:
                created = node[16] == b""
                new_branch = node[:16] + [value]
                return self._store_node(new_branch), created
            child_ref, created = self._insert(node[path[0]], path[1:], value)
            new_branch = list(node)
            new_branch[path[0]] = child_ref
            return self._store_node(new_branch), created

        node_path, is_leaf = hex_prefix_decode(node[0])
        common = _common_prefix(node_path, path)

        if is_leaf and common == len(node_path) == len(path):
            leaf = [node[0], value]
            return self._store_node(leaf), False
        if not is_leaf and common == len(node_path):
            child_ref, created = self._insert(node[1], path[common:], value)
            ext = [node[0], child_ref]
            return self._store_node(ext), created

        # Diverge: split into a branch under the shared prefix.
        branch: list = [EMPTY_REF] * 16 + [b""]
        old_rest = node_path[common:]
        if is_leaf:
            if old_rest:
                old_leaf = [hex_prefix_encode(old_rest[1:], True), node[1]]
                branch[old_rest[0]] = self._store_node(old_leaf)
            else:
                branch[16] = node[1]
        else:
            # old_rest is non-empty here: common < len(node_path)
            if len(old_rest) == 1:
                branch[old_rest[0]] = node[1]
            else:
                sub_ext = [hex_prefix_encode(old_rest[1:], False), node[1]]
                branch[old_rest[0]] = self._store_node(sub_ext)

        new_rest = path[common:]
        if new_rest:
            new_leaf = [hex_prefix_encode(new_rest[1:], True), value]
            branch[new_rest[0]] = self._store_node(new_leaf)
        else:
            branch[16] = value

        branch_ref = self._store_node(branch)
        if common:
            ext = [hex_prefix_encode(path[:common], False), branch_ref]
            return self._store_node(ext), True
        return branch_ref, True

    def _delete(self, ref: rlp.RlpItem,
                path: list[int]) -> tuple[rlp.RlpItem, bool]:
        node = self._resolve(ref)
        if node is None:
            return ref, False

        if len(node) == 17:
            if not path:
                if node[16] == b"":
                    return ref, False
                return self._normalize_branch(node[:16] + [b""]), True
            child_ref, deleted = self._delete(node[path[0]], path[1:])
            if not deleted:
                return ref, False
            new_branch = list(node)
            new_branch[path[0]] = child_ref
            return self._normalize_branch(new_branch), True

        node_path, is_leaf = hex_prefix_decode(node[0])
        if is_leaf:
            if node_path == path:
                return EMPTY_REF, True
            return ref, False
        if path[:len(node_path)] != node_path:
            return ref, False
        child_ref, deleted = self._delete(node[1], path[len(node_path):])
        if not deleted:
            return ref, False
        return self._merge_extension(node_path, child_ref), True

    def _normalize_branch(self, branch: list) -> rlp.RlpItem:
        """Collapse a branch left with zero or one occupant after a delete."""
        live = [i for i in range(16) if branch[i] != EMPTY_REF]
        has_value = branch[16] != b""

        if not live and not has_value:
            return EMPTY_REF
        if not live:
            leaf = [hex_prefix_encode([], True), branch[16]]
            return self._store_node(leaf)
        if len(live) > 1 or has_value:
            return self._store_node(branch)

        idx = live[0]
        return self._merge_extension([idx], branch[idx])

    def _merge_extension(self, prefix: list[int],
                         child_ref: rlp.RlpItem) -> rlp.RlpItem:
        """Graft prefix onto child, fusing chained short nodes."""
        if child_ref == EMPTY_REF:
            return EMPTY_REF
        child = self._resolve(child_ref)
        assert child is not None
        if len(child) == 17:
            ext = [hex_prefix_encode(prefix, False), self._store_node(child)]
            return self._store_node(ext)
        child_path, is_leaf = hex_prefix_decode(child[0])
        merged = [hex_prefix_encode(prefix + child_path, is_leaf), child[1]]
        return self._store_node(merged)


def _common_prefix(a: list[int], b: list[int]) -> int:
    n = min(len(a), len(b))
    for i in range(n):
        if a[i] != b[i]:
            return i
    return n
