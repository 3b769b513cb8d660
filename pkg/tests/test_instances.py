"""Instance schema, loaders, and the seeded generators."""

import json
from fractions import Fraction

import pytest

from erglab import (
    GENERATE_KINDS,
    KNOWN_CHECKS,
    ValidationError,
    canonical_json,
    choice_functions,
    coinduced_action,
    generate,
    instance_hash,
    load_instance,
    make_coinduce_ready,
    make_cyclic,
    make_product,
    make_random_pair,
    orbit_relation,
    phi,
    rational_map,
    rational_str,
)


# -- canonical serialization ---------------------------------------------------


def test_canonical_json_is_key_order_invariant():
    a = {"space": {"size": 2}, "perms": {"g": [1, 0]}}
    b = {"perms": {"g": [1, 0]}, "space": {"size": 2}}
    assert canonical_json(a) == canonical_json(b)
    assert instance_hash(a) == instance_hash(b)


def test_hash_changes_with_content():
    doc = make_cyclic(6)
    other = make_cyclic(8)
    assert instance_hash(doc) != instance_hash(other)


# -- loader ----------------------------------------------------------------------


def test_load_from_dict_text_and_path(tmp_path):
    doc = make_cyclic(6)
    from_dict = load_instance(doc)
    from_text = load_instance(json.dumps(doc))
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(doc))
    from_path = load_instance(str(path))
    assert from_dict.hash == from_text.hash == from_path.hash
    assert from_dict.relation("E") == from_path.relation("E")


def test_loaded_objects_are_live():
    inst = load_instance(make_cyclic(6))
    assert inst.space.size == 6
    assert inst.perm("g")(0) == 1
    assert inst.relation("E").num_classes == 2
    assert inst.action("main").labels == ("g", "g_inv")
    assert inst.coinduce is None


def test_ambient_falls_back_to_orbits():
    doc = make_cyclic(6)
    del doc["relations"]["F"]
    inst = load_instance(doc)
    assert inst.ambient() == orbit_relation(inst.action("main"))


def test_accessor_errors():
    inst = load_instance(make_cyclic(6))
    with pytest.raises(ValidationError):
        inst.perm("h")
    with pytest.raises(ValidationError):
        inst.relation("G")
    with pytest.raises(ValidationError):
        inst.action("aux")


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.pop("space"),
        lambda d: d["space"].update(size="six"),
        lambda d: d["perms"].update(g=[0, 0, 1, 2, 3, 4]),
        lambda d: d["perms"].update(g=[1, 0]),
        lambda d: d["relations"].update(E=[[0, 1], [1, 2, 3, 4, 5]]),
        lambda d: d["actions"]["main"].update(generators=["h"]),
        lambda d: d["actions"]["main"].update(inverses={"g": "g", "g_inv": "g_inv"}),
    ],
)
def test_loader_rejects_malformed_documents(mutate):
    doc = make_cyclic(6)
    mutate(doc)
    with pytest.raises(ValidationError):
        load_instance(doc)


def test_loader_rejects_unknown_check():
    doc = make_coinduce_ready(4, 2)
    doc["checks"] = ["rho_cocycle", "mystery"]
    with pytest.raises(ValidationError, match="mystery"):
        load_instance(doc)


def test_loader_requires_whole_coinduce_block():
    doc = make_coinduce_ready(4, 2)
    del doc["b0"]
    with pytest.raises(ValidationError, match="b0"):
        load_instance(doc)


def test_loader_rejects_non_free_subaction():
    doc = make_coinduce_ready(4, 2)
    # a transposition fixes two of the four points
    doc["perms"]["d"] = [1, 0, 2, 3]
    with pytest.raises(ValidationError):
        load_instance(doc)


# -- cyclic family ----------------------------------------------------------------


def test_cyclic_six_point_capture_values():
    inst = load_instance(make_cyclic(6))
    e_rel = inst.relation("E")
    values = {
        e.name: phi(e_rel, e.perm) for e in inst.action("main").closure()
    }
    assert values == {
        "g^0": 1,
        "g^1": 0,
        "g^2": 1,
        "g^3": 0,
        "g^4": 1,
        "g^5": 0,
    }


def test_cyclic_smallest_size():
    inst = load_instance(make_cyclic(2))
    assert inst.action("main").labels == ("g",)
    assert inst.relation("E").num_classes == 2


@pytest.mark.parametrize("size", [0, 1, 3, 5])
def test_cyclic_rejects_odd_or_tiny_sizes(size):
    with pytest.raises(ValidationError):
        make_cyclic(size)


# -- random pair family -----------------------------------------------------------


def test_random_pair_is_deterministic():
    assert make_random_pair(10, 7) == make_random_pair(10, 7)
    assert make_random_pair(10, 7) != make_random_pair(10, 8)


@pytest.mark.parametrize("size,seed", [(4, 0), (6, 3), (8, 11), (9, 2), (12, 5)])
def test_random_pair_structure(size, seed):
    inst = load_instance(make_random_pair(size, seed))
    e_rel = inst.relation("E")
    f_rel = inst.relation("F")
    assert e_rel.refines(f_rel)
    # constant index: the choice system accepts the pair
    cs = choice_functions(e_rel, f_rel)
    assert len(set(cs.strata)) == 1
    # the action's orbits realize the ambient relation
    assert orbit_relation(inst.action("main")) == f_rel


def test_random_pair_rejects_singletons():
    with pytest.raises(ValidationError):
        make_random_pair(1, 0)


# -- product family ---------------------------------------------------------------


def test_product_fibers_and_commutation():
    inst = load_instance(make_product(3, 4))
    action = inst.action("main")
    ga = inst.perm("ga")
    gb = inst.perm("gb")
    assert ga * gb == gb * ga
    e_rel = inst.relation("E")
    assert e_rel.num_classes == 3
    assert all(len(c) == 4 for c in e_rel.classes)
    assert orbit_relation(action) == inst.relation("F")


def test_product_involutive_factor_collapses_inverse():
    inst = load_instance(make_product(2, 3))
    assert "ga_inv" not in inst.perms
    assert "gb_inv" in inst.perms


def test_product_rejects_degenerate_factors():
    with pytest.raises(ValidationError):
        make_product(1, 5)


# -- co-induction family ----------------------------------------------------------


def test_coinduce_ready_four_over_two():
    inst = load_instance(make_coinduce_ready(4, 2))
    spec = inst.coinduce
    assert spec is not None
    assert spec.checks == KNOWN_CHECKS
    assert [e.name for e in spec.a0.elements] == ["d^0", "d^1"]
    sys = coinduced_action(spec.a0, spec.b0, spec.a)
    assert sys.N == 2
    assert sys.y_size == 2
    assert sys.product_size == 16


@pytest.mark.parametrize("size,index", [(2, 1), (2, 2), (6, 2), (6, 3), (8, 4), (9, 3)])
def test_coinduce_ready_builds_for_any_divisor(size, index):
    inst = load_instance(make_coinduce_ready(size, index))
    sys = coinduced_action(inst.coinduce.a0, inst.coinduce.b0, inst.coinduce.a)
    assert sys.N == index
    assert sys.y_size == size // index


def test_coinduce_ready_rejects_non_divisor():
    with pytest.raises(ValidationError):
        make_coinduce_ready(6, 4)


# -- dispatcher and serialization helpers -----------------------------------------


def test_generate_kinds_cover_dispatcher():
    for kind in GENERATE_KINDS:
        size = "4,2" if kind in ("product", "coinduce_ready") else 6
        doc = generate(kind, size, seed=1)
        load_instance(doc)


def test_generate_accepts_tuples_and_strings():
    assert generate("product", (4, 2)) == generate("product", "4,2")
    assert generate("coinduce_ready", [4, 2]) == generate("coinduce_ready", "4,2")


def test_generate_rejects_unknown_kind_and_bad_sizes():
    with pytest.raises(ValidationError):
        generate("spiral", 6)
    with pytest.raises(ValidationError):
        generate("product", "4")
    with pytest.raises(ValidationError):
        generate("coinduce_ready", "4,2,1")


def test_rational_serialization():
    assert rational_str(Fraction(2, 3)) == "2/3"
    assert rational_str(Fraction(4, 2)) == "2"
    assert rational_str(1) == "1"
    assert rational_map({"a": Fraction(1, 2)}) == {"a": "1/2"}
