"""HTTP process endpoint and static playground host.

POST /process runs a program text in a fresh interpreter and returns
its output and exit code as JSON; domain-level errors are part of the
output, so the HTTP status stays 200 for them.  GET /examples lists the
bundled corpus.  Everything else serves the static playground files.
Requests are independent: no narrative survives between calls.
"""

import json
import os
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .cli import EXIT_TIMEOUT, run_text

MAX_PROGRAM_BYTES = 256 * 1024
REQUEST_SECONDS = 10.0
TIMEOUT_MARKER = "timeout: execution exceeded {:.0f}s\n"

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json; charset=utf-8",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
}


def process_program(program, solutions_cap=None, semantics="wf",
                    seconds=REQUEST_SECONDS):
    """Run one program text; returns (output, exit_code).

    On timeout the partial output is returned with a marker line
    appended and the timeout exit code.
    """
    chunks = []
    deadline = time.monotonic() + seconds if seconds else None
    code = run_text(
        program, chunks.append, semantics=semantics, deadline=deadline,
        solutions_cap=solutions_cap,
    )
    output = "".join(chunks)
    if code == EXIT_TIMEOUT:
        # run_text reports the timeout as an error line; replace it with
        # the marker so partial output is clearly truncated
        if chunks and chunks[-1].startswith("error:"):
            output = "".join(chunks[:-1])
        output += TIMEOUT_MARKER.format(seconds)
    return output, code


def list_examples(examples_dir):
    """All bundled .pal files, sorted by name, with their sources."""
    entries = []
    for filename in sorted(os.listdir(examples_dir)):
        if not filename.endswith(".pal"):
            continue
        path = os.path.join(examples_dir, filename)
        with open(path, encoding="ascii") as fh:
            entries.append({"name": filename[: -len(".pal")], "source": fh.read()})
    return entries


class PlaygroundHandler(BaseHTTPRequestHandler):
    server_version = "pal-playground/0.1"

    # configured by serve()
    examples_dir = None
    static_dir = None
    semantics = "wf"
    request_seconds = REQUEST_SECONDS

    def log_message(self, fmt, *args):  # keep test output clean
        pass

    def _send_json(self, status, payload):
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_error_json(self, status, message):
        self._send_json(status, {"error": message})

    def do_POST(self):
        if self.path.rstrip("/") != "/process":
            self._send_error_json(404, "not found")
            return
        length = int(self.headers.get("Content-Length") or 0)
        if length > MAX_PROGRAM_BYTES:
            self._send_error_json(413, "program too large")
            return
        raw = self.rfile.read(length)
        try:
            payload = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            self._send_error_json(400, "body must be UTF-8 JSON")
            return
        if not isinstance(payload, dict) or "program" not in payload:
            self._send_error_json(422, "missing program field")
            return
        program = payload["program"]
        if not isinstance(program, str):
            self._send_error_json(422, "program must be a string")
            return
        if len(program.encode("utf-8")) > MAX_PROGRAM_BYTES:
            self._send_error_json(413, "program too large")
            return
        solutions_cap = payload.get("solutions")
        if solutions_cap is not None and (
            not isinstance(solutions_cap, int) or solutions_cap < 1
        ):
            self._send_error_json(422, "solutions must be a positive integer")
            return
        output, code = process_program(
            program,
            solutions_cap=solutions_cap,
            semantics=self.semantics,
            seconds=self.request_seconds,
        )
        self._send_json(200, {"output": output, "exitCode": code})

    def do_GET(self):
        path = self.path.split("?", 1)[0]
        if path.rstrip("/") == "/examples":
            try:
                entries = list_examples(self.examples_dir)
            except OSError:
                self._send_error_json(500, "examples directory unreadable")
                return
            self._send_json(200, entries)
            return
        if path == "/":
            path = "/index.html"
        self._send_static(path.lstrip("/"))

    def _send_static(self, relpath):
        if relpath.startswith("assets/"):
            relpath = relpath[len("assets/"):]
        full = os.path.realpath(os.path.join(self.static_dir, relpath))
        root = os.path.realpath(self.static_dir)
        if not full.startswith(root + os.sep) and full != root:
            self._send_error_json(404, "not found")
            return
        if not os.path.isfile(full):
            self._send_error_json(404, "not found")
            return
        ext = os.path.splitext(full)[1]
        ctype = _CONTENT_TYPES.get(ext, "application/octet-stream")
        with open(full, "rb") as fh:
            body = fh.read()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def make_server(host, port, examples_dir, static_dir, semantics="wf",
                request_seconds=REQUEST_SECONDS):
    handler = type(
        "ConfiguredHandler",
        (PlaygroundHandler,),
        {
            "examples_dir": examples_dir,
            "static_dir": static_dir,
            "semantics": semantics,
            "request_seconds": request_seconds,
        },
    )
    return ThreadingHTTPServer((host, port), handler)


def serve(addr, examples_dir, static_dir, semantics="wf"):
    host, _, port = addr.rpartition(":")
    host = host or "127.0.0.1"
    httpd = make_server(host, int(port), examples_dir, static_dir, semantics)
    hostname, portnum = httpd.server_address[:2]
    print(f"serving PAL playground on http://{hostname}:{portnum}/", flush=True)
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
    return 0
