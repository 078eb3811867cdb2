"""Batch and interactive driver, plus all output rendering.

Output formats are frozen here: transition blocks print the situation
number as ``N)`` followed by the performed actions in enumeration order
and the pertinent fluents in declaration-then-argument order; query
answers print ``yes``/``no``, binding lines, or ``Solution k:`` blocks
ending with a solution count.  Diagnostics are single lines so batch
output stays byte-deterministic.
"""

import argparse
import os
import sys
import time

from . import syntax
from .engine import create_engine
from .errors import (
    PalConfigError, PalError, PalRuntimeError, PalSemanticError,
    PalSyntaxError, PalTimeout,
)
from .grounding import Program, build_signature
from .narrative import Narrative, ground_step
from .planner import Options, Solver, build_query
from .syntax import Do, Initially, OptionsAst, ProgramAst, QueryAst, Section

EXIT_OK = 0
EXIT_SYNTAX = 1
EXIT_SEMANTIC = 2
EXIT_RUNTIME = 3
EXIT_TIMEOUT = 124


def packaged_examples_dir():
    return os.path.join(os.path.dirname(__file__), "examples")


def packaged_static_dir():
    return os.path.join(os.path.dirname(__file__), "static")


# --- rendering --------------------------------------------------------------

def render_transition_lines(prog, situation, acts, state):
    lines = [f"{situation})"]
    for aid in sorted(acts):
        lines.append(f"{prog.action_str(aid)}:={prog.decode_str(acts[aid])}")
    for fid in sorted(state.pert):
        lines.append(f"{prog.fluent_str(fid)}:={prog.decode_str(state.vals[fid])}")
    return lines


def render_record(prog, record):
    lines = render_transition_lines(prog, record.situation, record.acts, record.state)
    return "\n".join(lines) + "\n"


def render_solutions(prog, solutions, var_names, transitions, base_situation=0):
    """Render a query answer exactly as the CLI prints it."""
    if transitions == 0 and not var_names:
        return ("yes" if solutions else "no") + "\n"
    if transitions == 0:
        if not solutions:
            return "0 solutions\n"
        lines = []
        for sol in solutions:
            for name in var_names:
                value = sol.binding[name]
                lines.append(f"{name}={value}")
        lines.append("")
        lines.append(f"{len(solutions)} solutions")
        return "\n".join(lines) + "\n"
    if not solutions:
        return "0 solutions\n"
    blocks = []
    for k, sol in enumerate(solutions, start=1):
        lines = [f"Solution {k}:"]
        for name in var_names:
            lines.append(f"{name}={sol.binding[name]}")
        for step, acts in enumerate(sol.plan, start=1):
            state = sol.trace[step]
            lines.extend(
                render_transition_lines(prog, base_situation + step, acts, state)
            )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + f"\n\n{len(solutions)} solutions\n"


# --- the interpreter ---------------------------------------------------------

class Interpreter:
    """Executes a stream of sections and sentences against one narrative."""

    def __init__(self, write=None, semantics="wf", kernel=None, deadline=None,
                 solutions_cap=None):
        self._chunks = []
        self._write = write if write is not None else self._chunks.append
        self.semantics = semantics
        self.kernel = kernel
        self.deadline = deadline
        self.solutions_cap = solutions_cap
        self.decl_sections = []
        self.options = OptionsAst()
        self.prog = None
        self.engine = None
        self.narrative = None

    def output(self):
        return "".join(self._chunks)

    @property
    def locked(self):
        return self.prog is not None

    def run_program(self, text):
        """Batch execution: declarations first, then sentences in order."""
        program = syntax.parse_program(text)
        for item in program.stream:
            if isinstance(item, Section) and item.kind != "options":
                self.add_declarations(item)
        for item in program.stream:
            if isinstance(item, Section):
                if item.kind == "options":
                    self.apply_options(item)
            else:
                self.execute_sentence(item)

    def execute_item(self, item):
        """Incremental execution of one parsed section or sentence."""
        if isinstance(item, Section):
            if item.kind == "options":
                self.apply_options(item)
            else:
                self.add_declarations(item)
        else:
            self.execute_sentence(item)

    def add_declarations(self, section):
        if self.locked:
            raise PalSemanticError(
                "declarations must precede execution", section.pos.line,
                section.pos.column,
            )
        self.decl_sections.append(section)

    def apply_options(self, section):
        for setting in section.entries:
            if setting.name == "solutions" and setting.value < 1:
                raise PalSemanticError(
                    "solutions must be a positive integer",
                    setting.pos.line,
                    setting.pos.column,
                )
            self.options = syntax.apply_option(self.options, setting)

    def ensure_program(self):
        if self.prog is None:
            decls = ProgramAst(self.decl_sections)
            signature = build_signature(decls)
            self.prog = Program(signature, decls.rule_schemas)
            self.engine = create_engine(self.prog, self.semantics, kernel=self.kernel)
            self.narrative = Narrative(self.prog, self.engine)
        return self.prog

    def effective_options(self):
        opts = Options.from_ast(self.options)
        if self.solutions_cap is not None:
            limit = opts.solutions
            capped = self.solutions_cap if limit is None else min(limit, self.solutions_cap)
            opts = Options(concurrent=opts.concurrent, solutions=capped)
        return opts

    def execute_sentence(self, sentence):
        if isinstance(sentence, Initially):
            self.ensure_program()
            if self.narrative.initialize(sentence.assigns):
                self._write("Resume\n")
            return
        if isinstance(sentence, Do):
            prog = self.ensure_program()
            if not self.narrative.initialized:
                raise PalSemanticError(
                    "no initial situation (missing initially)",
                    sentence.pos.line,
                    sentence.pos.column,
                )
            for assigns in sentence.steps:
                self._check_deadline()
                acts = ground_step(assigns, prog, self.narrative)
                records = self.narrative.perform([acts])
                for record in records:
                    self._write(render_record(prog, record))
            return
        if isinstance(sentence, QueryAst):
            prog = self.ensure_program()
            if not self.narrative.initialized:
                raise PalSemanticError(
                    "no initial situation (missing initially)",
                    sentence.pos.line,
                    sentence.pos.column,
                )
            query = build_query(sentence, prog.signature, prog)
            opts = self.effective_options()
            solver = Solver(prog, self.engine, opts, deadline=self.deadline)
            solutions = solver.solve(
                self.narrative.current,
                self.narrative.previous_of_current(),
                query,
            )
            self._write(
                render_solutions(
                    prog,
                    solutions,
                    query.var_names,
                    query.transitions,
                    base_situation=len(self.narrative.states) - 1,
                )
            )
            return
        raise TypeError(f"not a sentence: {sentence!r}")

    def _check_deadline(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise PalTimeout("execution exceeded its time limit")

    # debug commands

    def dump_ground(self):
        return self.ensure_program().dump()

    def state_lines(self, k):
        if self.narrative is None or not self.narrative.initialized:
            raise PalSemanticError("no initial situation (missing initially)")
        state = self.narrative.state_at(k)
        prog = self.prog
        return [
            f"{prog.fluent_str(f)}:={prog.decode_str(state.vals[f])}"
            for f in range(prog.n_fluents)
        ]


def error_line(exc):
    if isinstance(exc, PalRuntimeError):
        return f"{exc.message}\n"
    return f"error: {exc}\n"


def exit_code_for(exc):
    if isinstance(exc, PalSyntaxError):
        return EXIT_SYNTAX
    if isinstance(exc, (PalSemanticError, PalConfigError)):
        return EXIT_SEMANTIC
    if isinstance(exc, PalTimeout):
        return EXIT_TIMEOUT
    return EXIT_RUNTIME


def run_text(text, write, semantics="wf", deadline=None, solutions_cap=None):
    """Run one self-contained program; returns the exit code."""
    interp = Interpreter(
        write=write, semantics=semantics, deadline=deadline,
        solutions_cap=solutions_cap,
    )
    try:
        interp.run_program(text)
    except PalError as exc:
        write(error_line(exc))
        return exit_code_for(exc)
    return EXIT_OK


def run(program_source=None, interactive_input=None, output_sink=None,
        semantics="wf"):
    """Execute a program, then further sentences from an input stream.

    Batch errors abort with the matching exit code; errors on the
    interactive stream are reported and the loop continues.
    """
    write = output_sink if output_sink is not None else sys.stdout.write
    interp = Interpreter(write=write, semantics=semantics)
    if program_source:
        try:
            interp.run_program(program_source)
        except PalError as exc:
            write(error_line(exc))
            return exit_code_for(exc)
    if interactive_input is not None:
        return interactive_loop(interp, interactive_input, write)
    return EXIT_OK


# --- interactive loop --------------------------------------------------------

def debug_command(interp, line, write):
    parts = line.split()
    if parts[0] == ":quit":
        return "quit"
    if parts[0] == ":ground":
        try:
            for rule_line in interp.dump_ground():
                write(rule_line + "\n")
        except PalError as exc:
            write(error_line(exc))
        return None
    if parts[0] == ":state":
        try:
            k = int(parts[1]) if len(parts) > 1 else 0
            for state_line in interp.state_lines(k):
                write(state_line + "\n")
        except (IndexError, ValueError):
            write("error: usage :state N\n")
        except PalError as exc:
            write(error_line(exc))
        return None
    write("unknown command\n")
    return None


def interactive_loop(interp, stream, write):
    """Sentence-at-a-time loop; errors are reported and do not abort.

    Input accumulates until it holds complete sentences; a syntax error
    discards the pending buffer and the loop carries on.
    """
    buffer = ""
    for raw in stream:
        line = raw.rstrip("\n")
        if not buffer.strip() and line.strip().startswith(":"):
            if debug_command(interp, line.strip(), write) == "quit":
                return EXIT_OK
            continue
        buffer += raw if raw.endswith("\n") else raw + "\n"
        try:
            items, buffer = syntax.parse_stream(buffer)
        except PalSyntaxError as exc:
            write(error_line(exc))
            buffer = ""
            continue
        for item in items:
            try:
                interp.execute_item(item)
            except PalError as exc:
                write(error_line(exc))
    if buffer.strip():
        write("error: unexpected end of input\n")
        return EXIT_SYNTAX
    return EXIT_OK


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="pal", description="PAL action language interpreter"
    )
    parser.add_argument("file", nargs="?", help="program file to execute")
    parser.add_argument(
        "--semantics", default="wf", help="rule semantics backend (only: wf)"
    )
    parser.add_argument(
        "--serve", metavar="ADDR", help="serve the HTTP playground on HOST:PORT"
    )
    parser.add_argument(
        "--examples-dir", default=None, help="directory of bundled .pal examples"
    )
    parser.add_argument(
        "--assets-dir", default=None, help="directory of playground static files"
    )
    parser.add_argument(
        "--dump-ground", action="store_true",
        help="print the ground program and exit",
    )
    args = parser.parse_args(argv)

    examples_dir = (
        args.examples_dir
        or os.environ.get("PAL_EXAMPLES")
        or packaged_examples_dir()
    )

    if args.serve:
        from . import server

        assets_dir = args.assets_dir or packaged_static_dir()
        return server.serve(args.serve, examples_dir, assets_dir, args.semantics)

    write = sys.stdout.write
    interp = Interpreter(write=write, semantics=args.semantics)

    if args.file:
        try:
            # latin-1 maps bytes one to one; the lexer reports non-ASCII
            # content with a position instead of a decode failure
            with open(args.file, encoding="latin-1") as fh:
                text = fh.read()
        except OSError as exc:
            sys.stderr.write(f"error: {exc}\n")
            return EXIT_SEMANTIC
        if args.dump_ground:
            return _dump_ground_main(text, write)
        try:
            interp.run_program(text)
        except PalError as exc:
            write(error_line(exc))
            return exit_code_for(exc)
        sys.stdout.flush()
        if sys.stdin.isatty():
            return interactive_loop(interp, sys.stdin, write)
        # redirected input stays usable for additional sentences
        rest = _read_stdin()
        if rest.strip():
            return _run_followup(interp, rest, write)
        return EXIT_OK

    if sys.stdin.isatty():
        return interactive_loop(interp, sys.stdin, write)
    text = _read_stdin()
    if args.dump_ground:
        return _dump_ground_main(text, write)
    try:
        interp.run_program(text)
    except PalError as exc:
        write(error_line(exc))
        return exit_code_for(exc)
    return EXIT_OK


def _read_stdin():
    return sys.stdin.buffer.read().decode("latin-1")


def _run_followup(interp, text, write):
    try:
        program = syntax.parse_program(text)
        for item in program.stream:
            interp.execute_item(item)
    except PalError as exc:
        write(error_line(exc))
        return exit_code_for(exc)
    return EXIT_OK


def _dump_ground_main(text, write):
    interp = Interpreter(write=write)
    try:
        program = syntax.parse_program(text)
        for item in program.stream:
            if isinstance(item, Section) and item.kind != "options":
                interp.add_declarations(item)
        for line in interp.dump_ground():
            write(line + "\n")
    except PalError as exc:
        write(error_line(exc))
        return exit_code_for(exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
