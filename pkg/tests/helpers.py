"""Shared test utilities: program building and tiny session drivers."""

import os

from pal import syntax
from pal.engine import WellFoundedEngine
from pal.grounding import Program, build_signature
from pal.narrative import Narrative

EXAMPLES_DIR = os.path.join(
    os.path.dirname(__file__), "..", "src", "pal", "examples"
)

BLOCKS_DECLS = """\
sets
  block = [1,4];
  location = block + {table};
actions
  carry: block -> location;
fluents
  loc: block -> location;
  free: block -> {true,false};
vars
  B,C : block;
rules
  loc(B):=carry(B);
  not free(C) if carry(B)=C;
  free(B) if pert(carry(C)) and prev(loc(C))=B;
  false if pert(carry(B)) and not prev(free(B));
  false if carry(B)=C and not prev(free(C));
"""

BLOCKS_INIT = "initially loc(B):=table,free(B);\n"


def example_path(name):
    return os.path.join(EXAMPLES_DIR, f"{name}.pal")


def example_text(name):
    with open(example_path(name)) as fh:
        return fh.read()


def build_program(text):
    ast = syntax.parse_program(text)
    signature = build_signature(ast)
    return Program(signature, ast.rule_schemas)


def load_session(text, kernel=None):
    """Build program + engine + narrative, executing initially/do sentences."""
    ast = syntax.parse_program(text)
    signature = build_signature(ast)
    prog = Program(signature, ast.rule_schemas)
    engine = WellFoundedEngine(prog, kernel=kernel)
    narrative = Narrative(prog, engine)
    from pal.narrative import ground_step

    for sentence in ast.sentences:
        if isinstance(sentence, syntax.Initially):
            narrative.initialize(sentence.assigns)
        elif isinstance(sentence, syntax.Do):
            for step in sentence.steps:
                narrative.perform([ground_step(step, prog, narrative)])
    return prog, engine, narrative


def acts_of(prog, **assignments):
    """Build an aid->encoded mapping from name(args) strings.

    acts_of(prog, **{"carry(1)": 2}) or acts_of(prog, tick=True).
    """
    out = {}
    for key, value in assignments.items():
        if "(" in key:
            name, rest = key.split("(", 1)
            args = tuple(
                int(a) if a.lstrip("-").isdigit() else a
                for a in rest.rstrip(")").split(",")
            )
        else:
            name, args = key, ()
        if value is True:
            value = "true"
        if value is False:
            value = "false"
        out[prog.action_index[(name, args)]] = prog.encode(value)
    return out


def decoded_values(state):
    return {
        f"{name}({','.join(map(str, args))})" if args else name: v
        for (name, args), v in state.values.items()
    }
