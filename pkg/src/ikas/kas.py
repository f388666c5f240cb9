"""Key assignment on top of a derivation graph.

Every node ``x`` gets a random secret ``sigma(x)``. For each edge ``(x, y)``
the public information carries ``sigma(y)`` sealed under a key derived from
``sigma(x)``, so whoever knows a node's secret can walk down the graph. The
key that actually protects objects is either ``sigma`` itself
(``key-recovery``) or a separate key derived from it
(``indistinguishability``, the default).
"""

from __future__ import annotations

import base64
import json
import os
import random
import struct
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from .core import (
    HyperRect,
    PolicySpace,
    decode_node_id,
    encode_node_id,
    format_node_id,
    parse_node_id,
)
from .graph import LEAVES, DerivationGraph

FORMAT_VERSION = 1
SECRET_BYTES = 32
NONCE_BYTES = 12
AEAD_ID = "AES-256-GCM"
KDF_ID = "HKDF-SHA256"

KEY_RECOVERY = "key-recovery"
INDISTINGUISHABILITY = "indistinguishability"
VARIANTS = (KEY_RECOVERY, INDISTINGUISHABILITY)

OBJECT_MAGIC = b"IKAS"
_OBJECT_VERSION = 1


class KasError(Exception):
    pass


class NotAuthorizedError(KasError):
    pass


class IntegrityError(KasError):
    pass


class FormatError(KasError):
    pass


# -- randomness ------------------------------------------------------------------


class RandomSource:
    """``os.urandom`` by default; a seeded generator for reproducible runs.

    A seeded source is for tests and fixtures only: anyone who knows the
    seed can recompute every secret.
    """

    def __init__(self, seed: int | None = None):
        self.seed = seed
        self._rng = random.Random(seed) if seed is not None else None

    def bytes(self, n: int) -> bytes:
        if self._rng is None:
            return os.urandom(n)
        return self._rng.randbytes(n)


# -- primitives --------------------------------------------------------------------


def _hkdf(secret: bytes, info: bytes) -> bytes:
    return HKDF(algorithm=hashes.SHA256(), length=32, salt=None, info=info).derive(secret)


def _edge_context(parent: HyperRect, child: HyperRect) -> bytes:
    p, c = encode_node_id(parent), encode_node_id(child)
    return struct.pack(">H", len(p)) + p + c


def edge_key(parent_secret: bytes, parent: HyperRect, child: HyperRect) -> bytes:
    return _hkdf(parent_secret, b"edge" + _edge_context(parent, child))


def object_key(secret: bytes, node: HyperRect, variant: str) -> bytes:
    if variant == KEY_RECOVERY:
        return secret
    if variant == INDISTINGUISHABILITY:
        return _hkdf(secret, b"enc" + encode_node_id(node))
    raise ValueError(f"unknown variant {variant!r}")


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def _unb64(text: str) -> bytes:
    try:
        return base64.b64decode(text, validate=True)
    except (ValueError, TypeError) as exc:
        raise FormatError(f"bad base64 field: {exc}") from exc


# -- data types ------------------------------------------------------------------------


@dataclass
class SecretStore:
    """Per-node secrets. Written once by :func:`setup`."""

    space: PolicySpace
    variant: str
    secrets: dict[HyperRect, bytes]

    def sigma(self, node: HyperRect) -> bytes:
        try:
            return self.secrets[node]
        except KeyError:
            raise NotAuthorizedError(f"no secret for {format_node_id(node)}") from None

    def kappa(self, node: HyperRect) -> bytes:
        return object_key(self.sigma(node), node, self.variant)

    def to_json(self) -> str:
        doc = {
            "version": FORMAT_VERSION,
            "variant": self.variant,
            "space": list(self.space.extents),
            "secrets": {format_node_id(n): _b64(s) for n, s in sorted(self.secrets.items())},
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SecretStore":
        doc = _load(text)
        try:
            return cls(
                PolicySpace(tuple(doc["space"])),
                doc["variant"],
                {parse_node_id(k): _unb64(v) for k, v in doc["secrets"].items()},
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed secret store: {exc}") from exc


@dataclass(frozen=True)
class Token:
    nonce: bytes
    sealed: bytes


@dataclass
class PublicInfo:
    construction: str
    params: dict
    space: PolicySpace
    variant: str
    target_set: str
    tokens: dict[tuple[HyperRect, HyperRect], Token]
    version: int = FORMAT_VERSION
    alg: dict = field(default_factory=lambda: {"aead": AEAD_ID, "kdf": KDF_ID})

    def children(self) -> dict[HyperRect, list[HyperRect]]:
        out: dict[HyperRect, list[HyperRect]] = {}
        for p, c in self.tokens:
            out.setdefault(p, []).append(c)
        return out

    def _sorted_edges(self):
        index = self.space.index
        return sorted(self.tokens.items(), key=lambda kv: (index(kv[0][0]), index(kv[0][1])))

    def to_json(self) -> str:
        doc = {
            "version": self.version,
            "construction": self.construction,
            "params": {k: list(v) if isinstance(v, tuple) else v for k, v in self.params.items()},
            "space": list(self.space.extents),
            "variant": self.variant,
            "target": self.target_set,
            "alg": self.alg,
            "edges": [
                {"p": format_node_id(p), "c": format_node_id(c), "n": _b64(t.nonce), "t": _b64(t.sealed)}
                for (p, c), t in self._sorted_edges()
            ],
        }
        return json.dumps(doc, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "PublicInfo":
        doc = _load(text)
        try:
            if doc["version"] != FORMAT_VERSION:
                raise FormatError(f"unsupported public info version {doc['version']}")
            if doc["alg"] != {"aead": AEAD_ID, "kdf": KDF_ID}:
                raise FormatError(f"unsupported algorithms {doc['alg']}")
            tokens = {
                (parse_node_id(e["p"]), parse_node_id(e["c"])): Token(_unb64(e["n"]), _unb64(e["t"]))
                for e in doc["edges"]
            }
            params = {k: tuple(v) if isinstance(v, list) else v for k, v in doc["params"].items()}
            return cls(
                doc["construction"],
                params,
                PolicySpace(tuple(doc["space"])),
                doc["variant"],
                doc.get("target", LEAVES),
                tokens,
                doc["version"],
                doc["alg"],
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed public info: {exc}") from exc


@dataclass(frozen=True)
class UserCredential:
    label: HyperRect
    keys: tuple[tuple[HyperRect, bytes], ...]

    def to_json(self) -> str:
        doc = {
            "label": format_node_id(self.label),
            "keys": [{"node": format_node_id(n), "secret": _b64(s)} for n, s in self.keys],
        }
        return json.dumps(doc, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "UserCredential":
        doc = _load(text)
        try:
            return cls(
                parse_node_id(doc["label"]),
                tuple((parse_node_id(k["node"]), _unb64(k["secret"])) for k in doc["keys"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed credential: {exc}") from exc


def _load(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("expected a JSON object")
    return doc


# -- operations ------------------------------------------------------------------------


def setup(
    g: DerivationGraph, variant: str = INDISTINGUISHABILITY, rng: RandomSource | None = None
) -> tuple[SecretStore, PublicInfo]:
    """Fresh secrets for every node of ``g`` and one sealed token per edge."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    rng = rng or RandomSource()
    space = g.space
    nodes = [space.rect(int(i)) for i in g.nodes]
    secrets = {node: rng.bytes(SECRET_BYTES) for node in nodes}
    tokens = {}
    for parent, child in g.edges():
        nonce = rng.bytes(NONCE_BYTES)
        aead = AESGCM(edge_key(secrets[parent], parent, child))
        sealed = aead.encrypt(nonce, secrets[child], _edge_context(parent, child))
        tokens[(parent, child)] = Token(nonce, sealed)
    store = SecretStore(space, variant, secrets)
    pub = PublicInfo(g.construction, dict(g.params), space, variant, g.target_set, tokens)
    return store, pub


def single_cover(label: HyperRect) -> list[HyperRect]:
    return [label]


def issue(
    store: SecretStore,
    label: HyperRect,
    cover: Callable[[HyperRect], Sequence[HyperRect]] = single_cover,
) -> UserCredential:
    if label not in store.space:
        raise ValueError(f"{label!r} lies outside {store.space}")
    return UserCredential(label, tuple((part, store.sigma(part)) for part in cover(label)))


def _path(children: dict[HyperRect, list[HyperRect]], start: HyperRect, goal: HyperRect):
    if start == goal:
        return [start]
    back = {start: None}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in children.get(u, ()):
            if v in back:
                continue
            back[v] = u
            if v == goal:
                path = [v]
                while back[path[-1]] is not None:
                    path.append(back[path[-1]])
                return path[::-1]
            queue.append(v)
    return None


def open_token(pub: PublicInfo, parent: HyperRect, child: HyperRect, parent_secret: bytes) -> bytes:
    token = pub.tokens[(parent, child)]
    try:
        return AESGCM(edge_key(parent_secret, parent, child)).decrypt(
            token.nonce, token.sealed, _edge_context(parent, child)
        )
    except InvalidTag:
        raise IntegrityError(
            f"token {format_node_id(parent)} -> {format_node_id(child)} failed authentication"
        ) from None


def derive_with_path(
    pub: PublicInfo, cred: UserCredential, target: HyperRect
) -> tuple[bytes, list[HyperRect]]:
    """Object key of ``target`` and the node path used to reach it."""
    if target not in pub.space:
        raise ValueError(f"{target!r} lies outside {pub.space}")
    holders = [(node, secret) for node, secret in cred.keys if node.covers(target)]
    if not holders:
        raise NotAuthorizedError(
            f"not authorized: {format_node_id(target)} is outside {format_node_id(cred.label)}"
        )
    children = pub.children()
    for node, secret in holders:
        path = _path(children, node, target)
        if path is None:
            continue
        for parent, child in zip(path, path[1:]):
            secret = open_token(pub, parent, child, secret)
        return object_key(secret, target, pub.variant), path
    raise NotAuthorizedError(f"not authorized: no derivation path to {format_node_id(target)}")


def derive(pub: PublicInfo, cred: UserCredential, target: HyperRect) -> bytes:
    return derive_with_path(pub, cred, target)[0]


def coalition_secrets(pub: PublicInfo, creds: Iterable[UserCredential]) -> dict[HyperRect, bytes]:
    """Every node secret a group can compute by pooling credentials and
    opening whatever tokens they can."""
    known: dict[HyperRect, bytes] = {}
    for cred in creds:
        known.update(cred.keys)
    children = pub.children()
    queue = deque(known)
    while queue:
        u = queue.popleft()
        for v in children.get(u, ()):
            if v not in known:
                known[v] = open_token(pub, u, v, known[u])
                queue.append(v)
    return known


# -- objects ----------------------------------------------------------------------------


def encrypt_object(key: bytes, target: HyperRect, payload: bytes, rng: RandomSource | None = None) -> bytes:
    rng = rng or RandomSource()
    node = encode_node_id(target)
    nonce = rng.bytes(NONCE_BYTES)
    header = OBJECT_MAGIC + bytes([_OBJECT_VERSION]) + struct.pack(">H", len(node)) + node + nonce
    return header + AESGCM(key).encrypt(nonce, payload, header)


def _split_object(blob: bytes) -> tuple[HyperRect, bytes, bytes, bytes]:
    fixed = len(OBJECT_MAGIC) + 1 + 2
    if len(blob) < fixed or not blob.startswith(OBJECT_MAGIC):
        raise FormatError("not an encrypted object")
    if blob[len(OBJECT_MAGIC)] != _OBJECT_VERSION:
        raise FormatError(f"unsupported object version {blob[len(OBJECT_MAGIC)]}")
    (length,) = struct.unpack_from(">H", blob, len(OBJECT_MAGIC) + 1)
    end = fixed + length + NONCE_BYTES
    if len(blob) < end:
        raise FormatError("truncated object header")
    try:
        target = decode_node_id(blob[fixed : fixed + length])
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    return target, blob[end - NONCE_BYTES : end], blob[:end], blob[end:]


def object_target(blob: bytes) -> HyperRect:
    return _split_object(blob)[0]


def decrypt_object(key: bytes, blob: bytes) -> bytes:
    _, nonce, header, body = _split_object(blob)
    try:
        return AESGCM(key).decrypt(nonce, body, header)
    except InvalidTag:
        raise IntegrityError("object failed authentication (wrong key or tampered data)") from None
