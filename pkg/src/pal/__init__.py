"""PAL: a causal action language interpreter with pertinence semantics.

Parse a domain description, execute a narrative, and answer hypothetical
planning queries:

    from pal import syntax, grounding, cli

    interp = cli.Interpreter()
    interp.run_program(open("examples/blocks.pal").read())
    print(interp.output())
"""

__version__ = "0.1.0"
