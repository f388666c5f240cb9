import base64
import hashlib
import json
import struct
from functools import lru_cache

import numpy as np
import pytest
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.hkdf import HKDF
from hypothesis import given, settings
from hypothesis import strategies as st

from ikas.core import HyperRect, PolicySpace, parse_node_id
from ikas.graph import DerivationGraph
from ikas.kas import (
    INDISTINGUISHABILITY,
    KEY_RECOVERY,
    FormatError,
    IntegrityError,
    NotAuthorizedError,
    PublicInfo,
    RandomSource,
    SecretStore,
    Token,
    UserCredential,
    coalition_secrets,
    decrypt_object,
    derive,
    derive_with_path,
    encrypt_object,
    issue,
    object_target,
    setup,
)
from ikas.multikey import two_key
from ikas.temporal import binary_decomposition

R = HyperRect.of


def _node_bytes(*pairs):
    return struct.pack(">H", len(pairs)) + b"".join(struct.pack(">II", lo, hi) for lo, hi in pairs)


@pytest.fixture(scope="module")
def bindec8():
    return setup(binary_decomposition(8), rng=RandomSource(11))


def test_token_count():
    _, pub = setup(binary_decomposition(4), rng=RandomSource(1))
    assert len(pub.tokens) == 12
    empty = DerivationGraph(PolicySpace((3,)), np.zeros(0), np.zeros(0), construction="none")
    _, pub = setup(empty, rng=RandomSource(1))
    assert pub.tokens == {}


def test_frozen_vector_key_recovery():
    store, pub = setup(binary_decomposition(4), KEY_RECOVERY, RandomSource(0))
    digest = hashlib.sha256(pub.to_json().encode()).hexdigest()
    assert digest == "74558e7e1a6d75b231a62414d1e4c9f64e226f5e270f00b9daf21df02286a84f"
    assert store.kappa(R((1, 1))).hex() == "cd072cd8be6f9f62ac4c09c28206e7e35594aa6b342f5d0a3a5e4842fab428f7"


def test_indistinguishability_key_is_hkdf_of_secret():
    store, _ = setup(binary_decomposition(4), INDISTINGUISHABILITY, RandomSource(0))
    sigma = store.sigma(R((1, 1)))
    expected = HKDF(hashes.SHA256(), 32, None, b"enc" + _node_bytes((1, 1))).derive(sigma)
    assert store.kappa(R((1, 1))) == expected
    assert expected.hex() == "86fea522d2e1838a056fdfd1b0f5a2d044ea6e57f821bfa1a280a08b1d995c2f"


def test_token_opens_with_parent_secret_only(bindec8):
    store, pub = bindec8
    p, c = R((1, 8)), R((1, 4))
    context = struct.pack(">H", 10) + _node_bytes((1, 8)) + _node_bytes((1, 4))
    key = HKDF(hashes.SHA256(), 32, None, b"edge" + context).derive(store.sigma(p))
    tok = pub.tokens[(p, c)]
    assert AESGCM(key).decrypt(tok.nonce, tok.sealed, context) == store.sigma(c)
    # secrets never appear in the public document
    text = pub.to_json()
    assert all(base64.b64encode(s).decode() not in text for s in store.secrets.values())


def test_issue_examples():
    store, _ = setup(binary_decomposition(16), rng=RandomSource(2))
    assert [n for n, _ in issue(store, R((3, 14))).keys] == [R((3, 14))]
    s = two_key(16)
    store, _ = setup(s.graph, rng=RandomSource(2))
    cred = issue(store, R((3, 14)), s.cover)
    assert [n for n, _ in cred.keys] == [R((3, 8)), R((9, 14))]
    assert [n for n, _ in issue(store, R((5, 5)), s.cover).keys] == [R((5, 5))]
    with pytest.raises(ValueError):
        issue(store, R((3, 17)), s.cover)


def test_derive_examples(bindec8):
    store, pub = bindec8
    key, path = derive_with_path(pub, issue(store, R((1, 8))), R((5, 5)))
    assert key == store.kappa(R((5, 5)))
    assert len(path) - 1 <= 3
    with pytest.raises(NotAuthorizedError, match="not authorized"):
        derive(pub, issue(store, R((3, 6))), R((7, 7)))
    key, path = derive_with_path(pub, issue(store, R((4, 4))), R((4, 4)))
    assert key == store.kappa(R((4, 4))) and len(path) == 1


def test_object_round_trip(bindec8):
    store, pub = bindec8
    target = R((5, 5))
    for payload in (b"", b"x", bytes(range(256)) * 4):
        blob = encrypt_object(store.kappa(target), target, payload, RandomSource(5))
        assert blob.startswith(b"IKAS\x01")
        assert object_target(blob) == target
        assert decrypt_object(derive(pub, issue(store, R((1, 8))), target), blob) == payload


def test_wrong_key_and_tampering(bindec8):
    store, pub = bindec8
    blob = encrypt_object(store.kappa(R((5, 5))), R((5, 5)), b"secret")
    with pytest.raises(IntegrityError):
        decrypt_object(store.kappa(R((6, 6))), blob)
    flipped = bytearray(blob)
    flipped[-1] ^= 1
    with pytest.raises(IntegrityError):
        decrypt_object(store.kappa(R((5, 5))), bytes(flipped))
    # rewriting the header's target breaks authentication too
    moved = blob.replace(_node_bytes((5, 5)), _node_bytes((6, 6)), 1)
    with pytest.raises(IntegrityError):
        decrypt_object(store.kappa(R((5, 5))), moved)
    with pytest.raises(FormatError):
        decrypt_object(store.kappa(R((5, 5))), b"nope")


def test_refused_before_decryption(bindec8):
    store, pub = bindec8
    with pytest.raises(NotAuthorizedError):
        derive(pub, issue(store, R((6, 8))), R((5, 5)))


def test_corrupted_token_is_integrity_error(bindec8):
    store, pub = bindec8
    bad = PublicInfo.from_json(pub.to_json())
    edge = (R((1, 8)), R((1, 4)))
    tok = bad.tokens[edge]
    bad.tokens[edge] = Token(tok.nonce, bytes([tok.sealed[0] ^ 1]) + tok.sealed[1:])
    with pytest.raises(IntegrityError):
        derive(bad, issue(store, R((1, 8))), R((2, 2)))


def test_spliced_token_fails():
    # a token moved onto another edge does not open there
    store, pub = setup(binary_decomposition(8), rng=RandomSource(3))
    pub.tokens[(R((1, 8)), R((1, 4)))] = pub.tokens[(R((1, 8)), R((5, 8)))]
    with pytest.raises(IntegrityError):
        derive(pub, issue(store, R((1, 8))), R((1, 1)))


def test_json_formats(bindec8):
    store, pub = bindec8
    doc = json.loads(pub.to_json())
    assert doc["version"] == 1
    assert doc["alg"] == {"aead": "AES-256-GCM", "kdf": "HKDF-SHA256"}
    assert len(doc["edges"]) == 56
    assert doc["edges"][0]["p"] == "d=1;1-2"
    index = PolicySpace((8,)).index
    order = [(index(parse_node_id(e["p"])), index(parse_node_id(e["c"]))) for e in doc["edges"]]
    assert order == sorted(order)
    assert PublicInfo.from_json(pub.to_json()).to_json() == pub.to_json()
    assert SecretStore.from_json(store.to_json()).secrets == store.secrets
    cred = issue(store, R((2, 7)))
    assert UserCredential.from_json(cred.to_json()) == cred
    for bad in ("[]", "{", '{"label": "d=1;1-2"}'):
        with pytest.raises(FormatError):
            UserCredential.from_json(bad)
    wrong = dict(doc, version=2)
    with pytest.raises(FormatError):
        PublicInfo.from_json(json.dumps(wrong))


def test_determinism_and_fresh_seeds():
    g = two_key(16).graph
    a = setup(g, rng=RandomSource(9))[1].to_json()
    b = setup(g, rng=RandomSource(9))[1].to_json()
    assert a == b
    s1, _ = setup(g, rng=RandomSource(1))
    s2, _ = setup(g, rng=RandomSource(2))
    assert not set(s1.secrets.values()) & set(s2.secrets.values())
    s3, _ = setup(g)
    assert len(set(s3.secrets.values())) == len(s3.secrets)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 16), st.integers(1, 16)), min_size=1, max_size=4))
def test_coalition_learns_only_its_own_leaves(labels):
    s = two_key(16)
    store, pub = _two_key_setup()
    rects = [R((min(a, b), max(a, b))) for a, b in labels]
    known = coalition_secrets(pub, [issue(store, r, s.cover) for r in rects])
    for node in known:
        assert any(r.covers(node) for r in rects)
        assert known[node] == store.sigma(node)


@lru_cache(maxsize=None)
def _two_key_setup():
    return setup(two_key(16).graph, rng=RandomSource(4))
