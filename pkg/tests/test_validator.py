"""Structural validation: who may owe what, and name discipline."""

from commitlab import Protocol, parse, validate

from samples import EXERCISE_CP, bundled_text


def validated(text):
    p = parse(text)
    assert isinstance(p, Protocol), p
    return p, validate(p)


def rules(diags):
    return sorted(d.rule for d in diags)


def test_clean_protocols_validate():
    for source in (bundled_text("appointment.cp"), EXERCISE_CP):
        _, diags = validated(source)
        assert diags == []


def test_needs_two_roles():
    _, diags = validated("protocol solo { role A message m A -> A { meaning none } }")
    assert "D-ROLES" in rules(diags)
    assert "D-SELF" in rules(diags)


def test_duplicate_names():
    _, diags = validated(
        """
        protocol dups {
          role A
          role A
          role B
          param p
          param p
          message m A -> B { meaning none }
          message m A -> B { meaning none }
        }
        """
    )
    assert rules(diags) == ["D-DUP", "D-DUP", "D-DUP"]


def test_unknown_roles_in_message_header():
    _, diags = validated(
        "protocol p { role A role B message m A -> C { meaning none } }"
    )
    assert rules(diags) == ["D-FREEVAR"]


def test_debtor_must_be_sender():
    _, diags = validated(
        """
        protocol p {
          role A
          role B
          message m A -> B {
            meaning { create C(B, A, top, pay(B)) }
          }
        }
        """
    )
    assert rules(diags) == ["D-DEBTOR"]
    assert diags[0].principle == "accountability-modularity"


def test_unbound_variable_in_create():
    _, diags = validated(
        """
        protocol p {
          role A
          role B
          message m A -> B (x) {
            meaning { create C(A, B, top, pay(A, y)) }
          }
        }
        """
    )
    assert rules(diags) == ["D-FREEVAR"]
    assert "y" in diags[0].message


def test_existential_antecedent_binds_consequent_variable():
    _, diags = validated(
        """
        protocol p {
          role A
          role B
          message m A -> B (slots) {
            meaning {
              create C(A, B,
                       exists s in slots: pick(B, s),
                       use(A, s))
            }
          }
        }
        """
    )
    assert diags == []


def test_protocol_param_counts_as_bound():
    _, diags = validated(
        """
        protocol p {
          role A
          role B
          param item
          message m A -> B {
            meaning { create C(A, B, top, give(A, item)) }
          }
        }
        """
    )
    assert diags == []


def test_unknown_role_inside_meaning():
    _, diags = validated(
        """
        protocol p {
          role A
          role B
          message m A -> B {
            meaning { create C(A, B, top, pay(C)) }
          }
        }
        """
    )
    assert rules(diags) == ["D-FREEVAR"]


def test_pattern_clause_variables_and_roles():
    _, diags = validated(
        """
        protocol p {
          role A
          role B
          message m A -> B {
            meaning { release C(B, A, _, pay(B, amount)) }
          }
          message n A -> B {
            meaning { delegate C(A, B, _, _) to C }
          }
        }
        """
    )
    assert rules(diags) == ["D-FREEVAR", "D-FREEVAR"]


def test_ordering_must_name_known_messages():
    _, diags = validated(
        """
        protocol p {
          role A
          role B
          order hello < nowhere
          message hello A -> B { meaning none }
        }
        """
    )
    assert rules(diags) == ["D-FREEVAR"]
    assert "nowhere" in diags[0].message
