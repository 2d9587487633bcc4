"""Adapter running a process model as an external executable.

Protocol, one request in flight at a time: for each evaluation the bridge
writes a single line ``d_1 ... d_n theta_1 ... theta_p`` (space separated,
shortest round-trip decimals) to the child's stdin and reads back one line
``g_1 ... g_m`` from its stdout. The child must flush after every line.
"""
import logging
import os
import select
import shlex
import subprocess
import time

from .core import ProcessModel
from .errors import ModelError

__all__ = ["ExternalModel", "ModelTimeoutError"]

log = logging.getLogger(__name__)


class ModelTimeoutError(ModelError):
    pass


class ExternalModel(ProcessModel):
    """:class:`~dsc.core.ProcessModel` backed by a line-oriented subprocess."""

    def __init__(self, command, n_constraints, timeout=60.0, cwd=None):
        if isinstance(command, str):
            command = shlex.split(command)
        if not command:
            raise ValueError("empty model command")
        if n_constraints < 1:
            raise ValueError("n_constraints must be >= 1")
        self.command = list(command)
        self.n_constraints = int(n_constraints)
        self.timeout = float(timeout)
        self.cwd = cwd
        self._proc = None
        self._buf = b""

    def __repr__(self):
        return f"ExternalModel({self.command!r}, n_constraints={self.n_constraints})"

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _start(self):
        try:
            self._proc = subprocess.Popen(
                self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                cwd=self.cwd, bufsize=0)
        except OSError as exc:
            raise ModelError(f"cannot start model command {self.command!r}: {exc}") from None
        self._buf = b""

    def _readline(self, deadline, where):
        fd = self._proc.stdout.fileno()
        while b"\n" not in self._buf:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self._kill()
                raise ModelTimeoutError(f"model timed out after {self.timeout:g} s at {where}")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                continue
            chunk = os.read(fd, 65536)
            if not chunk:
                code = self._proc.wait()
                self._proc = None
                raise ModelError(f"model process exited with status {code} at {where}")
            self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        return line.decode("utf-8", errors="replace")

    def evaluate(self, d, theta):
        if self._proc is None:
            self._start()
        values = [float(x) for x in d] + [float(x) for x in theta]
        where = f"d={[float(x) for x in d]}, theta={[float(x) for x in theta]}"
        request = (" ".join(repr(v) for v in values) + "\n").encode()
        deadline = time.monotonic() + self.timeout
        try:
            self._proc.stdin.write(request)
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            code = self._proc.poll()
            self._kill()
            raise ModelError(f"model process not accepting input (status {code}) at {where}") from None
        line = self._readline(deadline, where)
        fields = line.split()
        if len(fields) != self.n_constraints:
            raise ModelError(
                f"model returned {len(fields)} values, expected {self.n_constraints} at {where}: {line!r}")
        try:
            return [float(x) for x in fields]
        except ValueError:
            raise ModelError(f"model returned non-numeric output at {where}: {line!r}") from None

    def _kill(self):
        if self._proc is not None:
            self._proc.kill()
            self._proc.wait()
            self._proc = None

    def close(self):
        proc = self._proc
        if proc is None:
            return
        self._proc = None
        try:
            proc.stdin.close()
        except OSError:
            pass
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()
        proc.stdout.close()
