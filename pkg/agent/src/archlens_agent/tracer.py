"""Import-hook instrumentation writing trace logs in the archlens wire format.

Every wrapped call appends one line at exit time:

    traceId;orderIndex;depth;qualified.signature;entryNs;exitNs;processLabel

A trace starts whenever instrumented code is entered from uninstrumented
code (per thread); orderIndex counts recorded events within the trace in
call order, depth counts instrumented frames only. Wrapping is transparent:
return values pass through untouched and exceptions re-raise after the exit
event is recorded.

Emission is thread safe: wrappers put finished lines on a queue and a single
writer thread owns the file, which is also why there is one log, and one
active agent, per process.
"""

from __future__ import annotations

import functools
import itertools
import os
import queue
import socket
import sys
import threading
import time
import types
from pathlib import Path

from archlens_agent.policy import InstrumentationPolicy

_ORIGINAL_ATTR = "__archlens_original__"


class _ThreadState(threading.local):
    depth = 0
    trace_id = 0
    order = 0


class _WrappingLoader:
    """Delegates to the real loader, then wraps the executed module."""

    def __init__(self, inner, handle: "AgentHandle"):
        self._inner = inner
        self._handle = handle

    def create_module(self, spec):
        create = getattr(self._inner, "create_module", None)
        return create(spec) if create is not None else None

    def exec_module(self, module):
        self._inner.exec_module(module)
        self._handle.wrap_module(module)

    def __getattr__(self, name):
        return getattr(self._inner, name)


class _WrappingFinder:
    """Meta-path finder that resolves covered modules through the remaining
    finders and splices the wrapping loader in front of the real one."""

    def __init__(self, handle: "AgentHandle"):
        self._handle = handle
        self._in_progress: set[str] = set()

    def find_spec(self, fullname, path=None, target=None):
        handle = self._handle
        if not handle.active or not handle.policy.covers_module(fullname):
            return None
        if fullname in self._in_progress:
            return None
        self._in_progress.add(fullname)
        try:
            spec = None
            for finder in sys.meta_path:
                if finder is self:
                    continue
                find = getattr(finder, "find_spec", None)
                if find is None:
                    continue
                spec = find(fullname, path, target)
                if spec is not None:
                    break
        finally:
            self._in_progress.discard(fullname)
        if spec is None or spec.loader is None:
            return None
        if not hasattr(spec.loader, "exec_module"):
            return None
        spec.loader = _WrappingLoader(spec.loader, handle)
        return spec


class AgentHandle:
    """Active instrumentation session; create via install()."""

    def __init__(self, policy: InstrumentationPolicy, log_path: Path | str):
        self.policy = policy
        self.log_path = Path(log_path)
        self.active = False
        self.wrapped_count = 0
        self.skipped_callables = 0
        self._records: list[tuple[object, str, object, object]] = []
        self._wrapper_cache: dict[int, object] = {}
        self._state = _ThreadState()
        self._trace_seq = itertools.count(1)
        self._queue: queue.SimpleQueue = queue.SimpleQueue()
        self._process_label = f"{os.getpid()}@{socket.gethostname()}"
        # fails loudly on an unwritable path, before any hook is in place
        self._file = self.log_path.open("w", encoding="utf-8")
        self._writer = threading.Thread(
            target=self._drain, name="archlens-agent-writer", daemon=True
        )
        self._finder = _WrappingFinder(self)

    def _start(self) -> None:
        self.active = True
        self._writer.start()
        sys.meta_path.insert(0, self._finder)
        # modules imported before install() get wrapped in place
        for name, module in list(sys.modules.items()):
            if module is not None and self.policy.covers_module(name):
                self.wrap_module(module)

    # ------------------------------------------------------------ wrapping

    def wrap_module(self, module: types.ModuleType) -> None:
        if not self.active:
            return
        for name, value in list(vars(module).items()):
            self._wrap_binding(module, name, value)

    def _wrap_binding(self, container, name: str, value) -> None:
        if isinstance(value, types.FunctionType):
            home = getattr(value, "__module__", None)
            if home is None or not self.policy.covers_module(home):
                return
            if getattr(value, _ORIGINAL_ATTR, None) is not None:
                return  # already one of our wrappers
            if self.policy.excludes_name(value.__name__):
                return
            wrapper = self._wrapper_for(value, f"{home}.{value.__qualname__}")
            setattr(container, name, wrapper)
            self._records.append((container, name, value, wrapper))
            self.wrapped_count += 1
        elif isinstance(value, type):
            home = getattr(value, "__module__", None)
            if home is None or not self.policy.covers_module(home):
                return
            for member_name, member in list(vars(value).items()):
                if isinstance(member, (types.FunctionType, type)):
                    self._wrap_binding(value, member_name, member)
                elif isinstance(member, (staticmethod, classmethod)) or callable(
                    member
                ):
                    self.skipped_callables += 1
        elif callable(value) and not isinstance(value, types.ModuleType):
            # builtins, extension callables, callable instances
            self.skipped_callables += 1

    def _wrapper_for(self, fn, signature: str):
        cached = self._wrapper_cache.get(id(fn))
        if cached is not None:
            return cached
        state = self._state
        max_depth = self.policy.max_depth

        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            if not self.active:
                return fn(*args, **kwargs)
            depth = state.depth
            record = max_depth is None or depth < max_depth
            if record:
                if depth == 0:
                    state.trace_id = self._next_trace_id()
                    state.order = 0
                order = state.order
                state.order += 1
            state.depth = depth + 1
            entry_ns = time.monotonic_ns()
            try:
                return fn(*args, **kwargs)
            finally:
                # runs on exceptions too: exitNs is then the raise time
                exit_ns = time.monotonic_ns()
                state.depth = depth
                if record:
                    self._queue.put(
                        f"{state.trace_id};{order};{depth};{signature};"
                        f"{entry_ns};{exit_ns};{self._process_label}\n"
                    )

        setattr(wrapper, _ORIGINAL_ATTR, fn)
        self._wrapper_cache[id(fn)] = wrapper
        return wrapper

    def _next_trace_id(self) -> int:
        return ((threading.get_ident() & 0xFFFF) << 40) | next(self._trace_seq)

    # ------------------------------------------------------------ shutdown

    def _drain(self) -> None:
        while True:
            line = self._queue.get()
            if line is None:
                break
            self._file.write(line)
        self._file.flush()

    def uninstall(self) -> None:
        if not self.active:
            return  # double uninstall is a no-op
        self.active = False
        try:
            sys.meta_path.remove(self._finder)
        except ValueError:
            pass
        for container, name, original, wrapper in reversed(self._records):
            if getattr(container, name, None) is wrapper:
                setattr(container, name, original)
        self._records.clear()
        self._queue.put(None)
        self._writer.join(timeout=30)
        self._file.close()
        global _current
        with _lock:
            if _current is self:
                _current = None

    def __enter__(self) -> "AgentHandle":
        return self

    def __exit__(self, *exc_info) -> None:
        self.uninstall()


_current: AgentHandle | None = None
_lock = threading.Lock()


def install(policy: InstrumentationPolicy, log_path: Path | str) -> AgentHandle:
    """Start instrumenting: wraps already-imported covered modules and hooks
    future imports. One active agent (and one log file) per process."""
    global _current
    with _lock:
        if _current is not None and _current.active:
            raise RuntimeError(
                "an agent is already installed in this process; uninstall it first"
            )
        handle = AgentHandle(policy, log_path)
        _current = handle
    handle._start()
    return handle


def uninstall(handle: AgentHandle) -> None:
    handle.uninstall()
