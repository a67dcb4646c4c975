import json
import math
import os
import tempfile

import pytest

import dipmark


def test_dip_reweight_worked_example():
    out = dipmark.dip_reweight([0.2, 0.5, 0.3], [0, 1, 2], 0.3)
    assert out[0] == pytest.approx(0.0, abs=1e-12)
    assert out[1] == pytest.approx(0.4, abs=1e-12)
    assert out[2] == pytest.approx(0.6, abs=1e-12)


def test_dip_uniform_pair():
    out = dipmark.dip_reweight([0.5, 0.5], [0, 1], 0.45)
    assert out == pytest.approx([0.05, 0.95], abs=1e-12)


def test_preservation_two_permutations():
    a = dipmark.dip_reweight([0.99, 0.01], [0, 1], 0.5)
    b = dipmark.dip_reweight([0.99, 0.01], [1, 0], 0.5)
    avg = [(x + y) / 2 for x, y in zip(a, b)]
    assert avg == pytest.approx([0.99, 0.01], abs=1e-12)
    assert dipmark.preserve_exact(0.45, [0.2, 0.3, 0.5]) < 1e-13


def test_statistics_match_worked_example():
    assert dipmark.p_value_kl(100, 57, 0.5) == pytest.approx(0.374, abs=5e-3)
    assert dipmark.p_value_exact(100, 57, 0.5) == pytest.approx(0.0967, abs=5e-4)
    z, p = dipmark.z_test_baseline(100, 57, 0.5)
    assert z == pytest.approx(1.4)
    assert p == pytest.approx(0.0808, abs=5e-4)
    t = dipmark.threshold_for_fpr(200, 0.5, 0.01, "approx")
    assert t * math.sqrt(200) == pytest.approx(1.517, abs=5e-4)


def test_permutation_is_keyed_and_deterministic():
    key = "00112233445566778899aabbccddeeff"
    p1 = dipmark.permutation_from_key(key, [7], 16)
    p2 = dipmark.permutation_from_key(key, [7], 16)
    p3 = dipmark.permutation_from_key(key, [8], 16)
    assert p1 == p2
    assert sorted(p1) == list(range(16))
    assert p1 != p3
    assert len(dipmark.derive_seed_hex(key, [7])) == 64


def test_generate_detect_round_trip():
    key = "00112233445566778899aabbccddeeff"
    model = {
        "type": "table",
        "vocab_size": 256,
        "steps": [[1.0 / 256] * 256],
    }
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "model.json")
        with open(path, "w") as fh:
            json.dump(model, fh)
        tokens = dipmark.generate(path, key, "dip:alpha=0.45", 200, prompt=[3], seed=11)
    assert len(tokens) == 200
    report = dipmark.detect(tokens, key, 256, fpr=0.01, mode="exact")
    assert report["scored"] == 199
    assert report["decision"] is True
    wrong = dipmark.detect(tokens, "ff" * 16, 256, fpr=0.01, mode="exact")
    assert wrong["decision"] is False


def test_certified_radius_and_attack():
    assert dipmark.certified_radius(0.2, 0.1, 0.5, 1) == pytest.approx(0.1 / 2.6)
    assert dipmark.certified_radius(0.05, 0.1, 0.5, 1) == 0.0
    assert dipmark.certified_radius_fixed_length(0.2, 0.1, 1) == pytest.approx(0.05)
    tokens = list(range(50))
    attacked = dipmark.attack(tokens, "substitute", 0.2, 5, 64)
    assert len(attacked) == 50
    assert sum(a != b for a, b in zip(tokens, attacked)) == 10


def test_errors_surface_as_python_exceptions():
    with pytest.raises(dipmark.DipmarkError):
        dipmark.dip_reweight([0.6, 0.3], [0, 1], 0.45)
    with pytest.raises(dipmark.DipmarkError):
        dipmark.permutation_from_key("00ff", [1], 4)
