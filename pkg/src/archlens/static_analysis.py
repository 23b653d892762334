"""Static extraction of components, operations, calls, and dataflow from source.

The pipeline is scan -> parse -> extract -> resolve -> compose. Resolution is
deliberately conservative: a call site either resolves through an explicit
cascade (locals, same-class methods, module scope, import aliases, then a
corpus-unique bare name) or it is reported with a reason code. Nothing is
guessed into an edge.
"""

from __future__ import annotations

import ast
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from archlens.model import (
    ArchitectureModel,
    CallEdge,
    Component,
    ComponentKind,
    DataflowEdge,
    DataflowKind,
    OperationEntity,
    Provenance,
)
from archlens.names import QualifiedName
from archlens.report import (
    AMBIGUOUS_BARE_NAME,
    BUILTIN_CALL,
    CLASS_NO_INIT,
    CONDITIONAL_IMPORT,
    DATAFLOW_SKIPPED,
    EMPTY_SOURCE_SET,
    MODULE_LEVEL_CALL,
    NAME_COLLISION,
    PARSE_FAILURE,
    SHADOWED_BY_LOCAL,
    STAR_IMPORT,
    UNDEFINED_BARE_NAME,
    UNRESOLVED_ATTRIBUTE,
    UNRESOLVED_QUALIFIED,
    UNSUPPORTED_CALLEE,
    RunReport,
)

PYTHON_BUILTINS = frozenset({
    "abs", "all", "any", "ascii", "bin", "bool", "breakpoint", "bytearray",
    "bytes", "callable", "chr", "classmethod", "compile", "complex", "delattr",
    "dict", "dir", "divmod", "enumerate", "eval", "exec", "exit", "filter",
    "float", "format", "frozenset", "getattr", "globals", "hasattr", "hash",
    "hex", "id", "input", "int", "isinstance", "issubclass", "iter", "len",
    "list", "locals", "map", "max", "memoryview", "min", "next", "object",
    "oct", "open", "ord", "pow", "print", "property", "quit", "range", "repr",
    "reversed", "round", "set", "setattr", "slice", "sorted", "staticmethod",
    "str", "sum", "super", "tuple", "type", "vars", "zip", "__import__",
    "ArithmeticError", "AssertionError", "AttributeError", "BaseException",
    "Exception", "FileNotFoundError", "ImportError", "IndexError", "IOError",
    "KeyboardInterrupt", "KeyError", "LookupError", "ModuleNotFoundError",
    "NameError", "NotImplementedError", "OSError", "OverflowError",
    "PermissionError", "RuntimeError", "StopIteration", "SystemExit",
    "TimeoutError", "TypeError", "ValueError", "ZeroDivisionError",
})

SOURCE_SUFFIX = ".py"


# ---------------------------------------------------------------- scanning

@dataclass(frozen=True)
class SourceFile:
    relative_path: str  # posix separators
    module_name: QualifiedName
    is_package: bool    # true for __init__ files


@dataclass(frozen=True)
class SourceSet:
    root: Path
    files: tuple[SourceFile, ...]


def _glob_to_regex(pattern: str) -> re.Pattern[str]:
    """Translate a path glob to a regex; `**` crosses directories, `*` does not."""
    out = []
    i = 0
    while i < len(pattern):
        ch = pattern[i]
        if ch == "*":
            if pattern[i : i + 3] == "**/":
                out.append("(?:.*/)?")
                i += 3
                continue
            if pattern[i : i + 2] == "**":
                out.append(".*")
                i += 2
                continue
            out.append("[^/]*")
        elif ch == "?":
            out.append("[^/]")
        else:
            out.append(re.escape(ch))
        i += 1
    return re.compile("".join(out) + r"\Z")


def _module_name_for(relative: str) -> tuple[QualifiedName, bool]:
    parts = relative[: -len(SOURCE_SUFFIX)].split("/")
    is_package = parts[-1] == "__init__"
    if is_package:
        parts = parts[:-1]
    if not parts:
        raise ValueError("bare __init__.py at the scan root has no module name")
    return QualifiedName(tuple(parts)), is_package


def scan_project(
    root: Path,
    include_globs: list[str] | None = None,
    exclude_globs: list[str] | None = None,
    report: RunReport | None = None,
) -> SourceSet:
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"project root {root} is not a directory")
    includes = [_glob_to_regex(g) for g in (include_globs or ["**/*" + SOURCE_SUFFIX])]
    excludes = [_glob_to_regex(g) for g in (exclude_globs or [])]

    files: list[SourceFile] = []
    seen_modules: dict[QualifiedName, str] = {}
    for path in sorted(root.rglob("*")):
        if not path.is_file() or path.suffix != SOURCE_SUFFIX:
            continue
        relative = path.relative_to(root).as_posix()
        if not any(rx.match(relative) for rx in includes):
            continue
        if any(rx.match(relative) for rx in excludes):
            continue
        try:
            module_name, is_package = _module_name_for(relative)
        except Exception as exc:
            if report is not None:
                report.add(PARSE_FAILURE, relative, f"unusable module path: {exc}")
            continue
        if module_name in seen_modules:
            if report is not None:
                report.add(
                    NAME_COLLISION,
                    module_name.text,
                    f"{relative} duplicates {seen_modules[module_name]}",
                )
            continue
        seen_modules[module_name] = relative
        files.append(SourceFile(relative, module_name, is_package))

    if not files and report is not None:
        report.add(EMPTY_SOURCE_SET, str(root))
    return SourceSet(root, tuple(files))


# ---------------------------------------------------------------- extraction

@dataclass(frozen=True)
class FunctionInfo:
    signature: QualifiedName
    arity: int
    owner: QualifiedName  # owning component: module or class


@dataclass(frozen=True)
class ClassInfo:
    name: QualifiedName
    parent: QualifiedName  # module or enclosing class


@dataclass
class EntityTable:
    module: QualifiedName
    is_package: bool = False
    functions: list[FunctionInfo] = field(default_factory=list)
    classes: list[ClassInfo] = field(default_factory=list)
    aliases: dict[str, str] = field(default_factory=dict)
    star_imports: list[str] = field(default_factory=list)
    conditional_imports: list[str] = field(default_factory=list)
    module_bindings: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class RawCallSite:
    caller: QualifiedName       # operation signature, or the module for top-level code
    module: QualifiedName
    callee_text: str            # dotted source text; "" when unsupported
    ordinal: int
    caller_is_module: bool = False
    local_names: frozenset[str] = frozenset()
    nested_defs: tuple[tuple[str, str], ...] = ()
    owner_class: str | None = None
    unsupported: str | None = None  # description when the callee expression has no dotted form


@dataclass(frozen=True)
class FlowCandidate:
    caller: QualifiedName
    kind: DataflowKind
    inner_ordinal: int
    outer_ordinal: int | None  # None: flows into the caller via assignment
    inner_text: str
    outer_text: str


@dataclass
class ModuleExtraction:
    table: EntityTable
    call_sites: list[RawCallSite] = field(default_factory=list)
    flow_candidates: list[FlowCandidate] = field(default_factory=list)


_DEF_NODES = (ast.FunctionDef, ast.AsyncFunctionDef)
_SCOPE_BARRIERS = (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)


def _dotted_text(node: ast.expr) -> str | None:
    parts: list[str] = []
    while isinstance(node, ast.Attribute):
        parts.append(node.attr)
        node = node.value
    if isinstance(node, ast.Name):
        parts.append(node.id)
        return ".".join(reversed(parts))
    return None


def _arity(node: ast.FunctionDef | ast.AsyncFunctionDef) -> int:
    args = node.args
    count = len(args.posonlyargs) + len(args.args) + len(args.kwonlyargs)
    if args.vararg is not None:
        count += 1
    if args.kwarg is not None:
        count += 1
    return count


def _assigned_names(stmts: list[ast.stmt]) -> set[str]:
    """Names bound by assignment-like statements, not descending into nested
    defs or classes (those are separate scopes)."""
    names: set[str] = set()

    def collect_target(node: ast.expr) -> None:
        if isinstance(node, ast.Name):
            names.add(node.id)
        elif isinstance(node, (ast.Tuple, ast.List)):
            for element in node.elts:
                collect_target(element)
        elif isinstance(node, ast.Starred):
            collect_target(node.value)

    def visit(node: ast.AST) -> None:
        if isinstance(node, _SCOPE_BARRIERS):
            return
        if isinstance(node, ast.Assign):
            for target in node.targets:
                collect_target(target)
        elif isinstance(node, (ast.AnnAssign, ast.AugAssign)):
            collect_target(node.target)
        elif isinstance(node, ast.For):
            collect_target(node.target)
        elif isinstance(node, ast.withitem) and node.optional_vars is not None:
            collect_target(node.optional_vars)
        elif isinstance(node, ast.NamedExpr):
            collect_target(node.target)
        elif isinstance(node, ast.ExceptHandler) and node.name:
            names.add(node.name)
        elif isinstance(node, (ast.Import, ast.ImportFrom)):
            for alias in node.names:
                if alias.name == "*":
                    continue
                bound = alias.asname or alias.name.split(".")[0]
                names.add(bound)
        for child in ast.iter_child_nodes(node):
            visit(child)

    for stmt in stmts:
        visit(stmt)
    return names


def _calls_in_order(stmts: list[ast.stmt]) -> list[ast.Call]:
    """All call expressions in source order, not descending into nested scopes."""
    calls: list[ast.Call] = []

    def visit(node: ast.AST) -> None:
        if isinstance(node, _SCOPE_BARRIERS):
            return
        if isinstance(node, ast.Call):
            calls.append(node)
        for child in ast.iter_child_nodes(node):
            visit(child)

    for stmt in stmts:
        visit(stmt)
    return calls


def _assign_value_calls(stmts: list[ast.stmt]) -> list[ast.Call]:
    """Calls whose result is bound by an assignment, same scope rules."""
    bound: list[ast.Call] = []

    def visit(node: ast.AST) -> None:
        if isinstance(node, _SCOPE_BARRIERS):
            return
        if isinstance(node, (ast.Assign, ast.AnnAssign)) and isinstance(
            node.value, ast.Call
        ):
            bound.append(node.value)
        for child in ast.iter_child_nodes(node):
            visit(child)

    for stmt in stmts:
        visit(stmt)
    return bound


class _ModuleWalker:
    def __init__(self, module_name: QualifiedName, is_package: bool):
        self.module = module_name
        self.package_context = module_name if is_package else module_name.parent
        self.out = ModuleExtraction(EntityTable(module_name, is_package))

    # -- imports

    def _import_base(self, node: ast.ImportFrom) -> str | None:
        if node.level == 0:
            return node.module
        context = self.package_context
        for _ in range(node.level - 1):
            if context is None:
                return None
            context = context.parent
        if context is None:
            return None
        if node.module:
            return context.text + "." + node.module
        return context.text

    def handle_import(self, node: ast.Import | ast.ImportFrom, conditional: bool) -> None:
        table = self.out.table
        if isinstance(node, ast.Import):
            for alias in node.names:
                if conditional:
                    table.conditional_imports.append(alias.asname or alias.name)
                elif alias.asname:
                    table.aliases[alias.asname] = alias.name
                else:
                    top = alias.name.split(".")[0]
                    table.aliases[top] = top
            return
        base = self._import_base(node)
        if base is None:
            return
        for alias in node.names:
            if alias.name == "*":
                table.star_imports.append(base)
                continue
            target = base + "." + alias.name
            if conditional:
                table.conditional_imports.append(alias.asname or alias.name)
            else:
                table.aliases[alias.asname or alias.name] = target

    # -- module body

    def walk(self, tree: ast.Module) -> ModuleExtraction:
        module_stmts: list[ast.stmt] = []
        for stmt in tree.body:
            if isinstance(stmt, _DEF_NODES):
                self.walk_function(stmt, prefix=self.module, owner=self.module,
                                   enclosing=None)
            elif isinstance(stmt, ast.ClassDef):
                self.walk_class(stmt, prefix=self.module)
            else:
                module_stmts.append(stmt)

        table = self.out.table
        for stmt in module_stmts:
            for node in ast.walk(stmt):
                if isinstance(node, (ast.Import, ast.ImportFrom)):
                    self.handle_import(node, conditional=node is not stmt)
        table.module_bindings = sorted(_assigned_names(module_stmts))

        ordinal = 0
        for call in _calls_in_order(module_stmts):
            text = _dotted_text(call.func)
            self.out.call_sites.append(
                RawCallSite(
                    caller=self.module,
                    module=self.module,
                    callee_text=text or "",
                    ordinal=ordinal,
                    caller_is_module=True,
                    unsupported=None if text else type(call.func).__name__,
                )
            )
            ordinal += 1
        return self.out

    def walk_class(self, node: ast.ClassDef, prefix: QualifiedName) -> None:
        class_name = prefix.child(node.name)
        self.out.table.classes.append(ClassInfo(class_name, prefix))
        for stmt in node.body:
            if isinstance(stmt, _DEF_NODES):
                self.walk_function(stmt, prefix=class_name, owner=class_name,
                                   enclosing=None)
            elif isinstance(stmt, ast.ClassDef):
                self.walk_class(stmt, prefix=class_name)

    def walk_function(
        self,
        node: ast.FunctionDef | ast.AsyncFunctionDef,
        prefix: QualifiedName,
        owner: QualifiedName,
        enclosing: "_Scope | None",
    ) -> None:
        signature = prefix.child(node.name)
        self.out.table.functions.append(FunctionInfo(signature, _arity(node), owner))

        params = {a.arg for a in node.args.posonlyargs}
        params |= {a.arg for a in node.args.args}
        params |= {a.arg for a in node.args.kwonlyargs}
        if node.args.vararg:
            params.add(node.args.vararg.arg)
        if node.args.kwarg:
            params.add(node.args.kwarg.arg)

        nested: dict[str, str] = dict(enclosing.nested) if enclosing else {}
        direct_defs = [s for s in node.body if isinstance(s, _DEF_NODES)]
        for sub in direct_defs:
            nested[sub.name] = signature.child(sub.name).text

        blockers = set(params) | _assigned_names(node.body)
        if enclosing:
            blockers |= enclosing.blockers
        blockers -= set(nested)

        # imports inside a function bind only locally; record them as
        # conditional so the gap in alias coverage is visible in the report
        def collect_local_imports(sub_node: ast.AST) -> None:
            if isinstance(sub_node, _SCOPE_BARRIERS):
                return
            if isinstance(sub_node, (ast.Import, ast.ImportFrom)):
                for alias in sub_node.names:
                    self.out.table.conditional_imports.append(
                        alias.asname or alias.name
                    )
            for child in ast.iter_child_nodes(sub_node):
                collect_local_imports(child)

        for stmt in node.body:
            collect_local_imports(stmt)

        owner_class = owner.text if owner != self.module and owner.parts else None
        # owner is a class exactly when it differs from the module and the
        # operation is not nested inside another function
        is_method = owner != self.module and enclosing is None and prefix == owner

        scope = _Scope(blockers=frozenset(blockers), nested=nested)

        calls = _calls_in_order(node.body)
        ordinals = {id(call): i for i, call in enumerate(calls)}
        texts = {}
        for call in calls:
            text = _dotted_text(call.func)
            texts[id(call)] = text
            self.out.call_sites.append(
                RawCallSite(
                    caller=signature,
                    module=self.module,
                    callee_text=text or "",
                    ordinal=ordinals[id(call)],
                    local_names=scope.blockers,
                    nested_defs=tuple(sorted(nested.items())),
                    owner_class=owner_class if is_method else (
                        enclosing.owner_class if enclosing else None
                    ),
                    unsupported=None if text else type(call.func).__name__,
                )
            )

        for bound_call in _assign_value_calls(node.body):
            self.out.flow_candidates.append(
                FlowCandidate(
                    caller=signature,
                    kind=DataflowKind.RETURN_VALUE,
                    inner_ordinal=ordinals[id(bound_call)],
                    outer_ordinal=None,
                    inner_text=texts.get(id(bound_call)) or "?",
                    outer_text=signature.text,
                )
            )
        for call in calls:
            argument_exprs = list(call.args) + [kw.value for kw in call.keywords]
            for arg in argument_exprs:
                if isinstance(arg, ast.Call) and id(arg) in ordinals:
                    self.out.flow_candidates.append(
                        FlowCandidate(
                            caller=signature,
                            kind=DataflowKind.ARGUMENT,
                            inner_ordinal=ordinals[id(arg)],
                            outer_ordinal=ordinals[id(call)],
                            inner_text=texts.get(id(arg)) or "?",
                            outer_text=texts.get(id(call)) or "?",
                        )
                    )

        for sub in direct_defs:
            self.walk_function(
                sub,
                prefix=signature,
                owner=owner,
                enclosing=_Scope(
                    blockers=scope.blockers,
                    nested=nested,
                    owner_class=owner_class if is_method else (
                        enclosing.owner_class if enclosing else None
                    ),
                ),
            )


@dataclass(frozen=True)
class _Scope:
    blockers: frozenset[str]
    nested: dict[str, str]
    owner_class: str | None = None


def parse_source(path: Path) -> ast.Module:
    text = Path(path).read_text(encoding="utf-8")
    return ast.parse(text, filename=str(path))


def extract_entities(
    tree: ast.Module, module_name: QualifiedName, is_package: bool = False
) -> EntityTable:
    return extract_module(tree, module_name, is_package).table


def extract_module(
    tree: ast.Module, module_name: QualifiedName, is_package: bool = False
) -> ModuleExtraction:
    return _ModuleWalker(module_name, is_package).walk(tree)


# ---------------------------------------------------------------- resolution

@dataclass
class _CorpusIndex:
    operations: set[str]
    classes: set[str]
    module_functions: dict[str, dict[str, str]]
    module_classes: dict[str, dict[str, str]]
    bare_candidates: dict[str, list[str]]
    aliases: dict[str, dict[str, str]]
    module_bindings: dict[str, set[str]]


def _build_index(tables: list[EntityTable]) -> _CorpusIndex:
    operations: set[str] = set()
    classes: set[str] = set()
    module_functions: dict[str, dict[str, str]] = {}
    module_classes: dict[str, dict[str, str]] = {}
    bare: dict[str, list[str]] = {}
    aliases: dict[str, dict[str, str]] = {}
    bindings: dict[str, set[str]] = {}

    for table in tables:
        module = table.module.text
        module_functions[module] = {}
        module_classes[module] = {}
        aliases[module] = dict(table.aliases)
        bindings[module] = set(table.module_bindings)
        for fn in table.functions:
            operations.add(fn.signature.text)
            if fn.owner == table.module:
                module_functions[module][fn.signature.last] = fn.signature.text
                bare.setdefault(fn.signature.last, []).append(fn.signature.text)
        for cls in table.classes:
            classes.add(cls.name.text)
            if cls.parent == table.module:
                module_classes[module][cls.name.last] = cls.name.text
                bare.setdefault(cls.name.last, []).append(cls.name.text)
    return _CorpusIndex(
        operations, classes, module_functions, module_classes, bare, aliases, bindings
    )


@dataclass(frozen=True)
class _Resolution:
    target: str | None
    reason: str | None = None
    detail: str = ""


def _constructor(index: _CorpusIndex, class_text: str, written: str) -> _Resolution:
    init = class_text + ".__init__"
    if init in index.operations:
        return _Resolution(init)
    return _Resolution(None, CLASS_NO_INIT, written)


def _lookup_qualified(index: _CorpusIndex, target: str, written: str) -> _Resolution:
    if target in index.operations:
        return _Resolution(target)
    if target in index.classes:
        return _constructor(index, target, written)
    return _Resolution(None, UNRESOLVED_QUALIFIED, written)


def _resolve_site(index: _CorpusIndex, site: RawCallSite) -> _Resolution:
    if site.caller_is_module:
        return _Resolution(None, MODULE_LEVEL_CALL, site.callee_text or site.unsupported or "?")
    if site.unsupported is not None:
        return _Resolution(None, UNSUPPORTED_CALLEE, site.unsupported)

    module = site.module.text
    segments = site.callee_text.split(".")
    nested = dict(site.nested_defs)

    if len(segments) == 1:
        name = segments[0]
        if name in nested:
            return _Resolution(nested[name])
        if name in site.local_names:
            return _Resolution(None, SHADOWED_BY_LOCAL, name)
        if name in index.module_functions[module]:
            return _Resolution(index.module_functions[module][name])
        if name in index.module_classes[module]:
            return _constructor(index, index.module_classes[module][name], name)
        if name in index.aliases[module]:
            return _lookup_qualified(index, index.aliases[module][name], name)
        if name in index.module_bindings[module]:
            return _Resolution(None, SHADOWED_BY_LOCAL, f"{name} (module-level binding)")
        if name in PYTHON_BUILTINS:
            return _Resolution(None, BUILTIN_CALL, name)
        candidates = index.bare_candidates.get(name, [])
        if len(candidates) == 1:
            target = candidates[0]
            if target in index.classes:
                return _constructor(index, target, name)
            return _Resolution(target)
        if len(candidates) > 1:
            return _Resolution(
                None, AMBIGUOUS_BARE_NAME, f"{name}: {', '.join(sorted(candidates))}"
            )
        return _Resolution(None, UNDEFINED_BARE_NAME, name)

    first = segments[0]
    rest = segments[1:]
    if first in ("self", "cls") and site.owner_class:
        if len(rest) == 1:
            candidate = site.owner_class + "." + rest[0]
            if candidate in index.operations:
                return _Resolution(candidate)
        return _Resolution(None, UNRESOLVED_ATTRIBUTE, site.callee_text)
    if first in nested or first in site.local_names:
        return _Resolution(None, UNRESOLVED_ATTRIBUTE, site.callee_text)
    if first in index.module_classes[module]:
        candidate = index.module_classes[module][first] + "." + ".".join(rest)
        if candidate in index.operations:
            return _Resolution(candidate)
        if candidate in index.classes:
            return _constructor(index, candidate, site.callee_text)
        return _Resolution(None, UNRESOLVED_ATTRIBUTE, site.callee_text)
    if first in index.module_functions[module]:
        return _Resolution(None, UNRESOLVED_ATTRIBUTE, site.callee_text)
    if first in index.aliases[module]:
        expanded = index.aliases[module][first] + "." + ".".join(rest)
        return _lookup_qualified(index, expanded, site.callee_text)
    return _Resolution(None, UNRESOLVED_QUALIFIED, site.callee_text)


def resolve_calls(
    tables: list[EntityTable],
    sites: list[RawCallSite],
    report: RunReport | None = None,
) -> tuple[set[CallEdge], dict[tuple[str, int], QualifiedName]]:
    index = _build_index(tables)
    edges: set[CallEdge] = set()
    resolutions: dict[tuple[str, int], QualifiedName] = {}
    for site in sites:
        result = _resolve_site(index, site)
        if result.target is not None:
            callee = QualifiedName.parse(result.target)
            resolutions[(site.caller.text, site.ordinal)] = callee
            edges.add(CallEdge(site.caller, callee, 0, Provenance.STATIC))
        elif report is not None and result.reason is not None:
            report.add(result.reason, site.caller.text, result.detail)
    return edges, resolutions


def extract_dataflow(
    candidates: list[FlowCandidate],
    resolutions: dict[tuple[str, int], QualifiedName],
    report: RunReport | None = None,
) -> set[DataflowEdge]:
    flows: set[DataflowEdge] = set()
    for cand in candidates:
        inner = resolutions.get((cand.caller.text, cand.inner_ordinal))
        if cand.kind is DataflowKind.RETURN_VALUE:
            if inner is not None:
                flows.add(DataflowEdge(inner, cand.caller, cand.kind))
            elif report is not None:
                report.add(
                    DATAFLOW_SKIPPED,
                    cand.caller.text,
                    f"{cand.inner_text} -> {cand.outer_text}",
                )
            continue
        outer = resolutions.get((cand.caller.text, cand.outer_ordinal))
        if inner is not None and outer is not None:
            flows.add(DataflowEdge(inner, outer, cand.kind))
        elif (inner is None) != (outer is None) and report is not None:
            # one endpoint resolved: a near-miss worth auditing; fully
            # unresolved nests (builtin soup) stay silent
            report.add(
                DATAFLOW_SKIPPED,
                cand.caller.text,
                f"{cand.inner_text} -> {cand.outer_text}",
            )
    return flows


# ---------------------------------------------------------------- composition

def _component_rows(source_set: SourceSet, tables: list[EntityTable]) -> list[Component]:
    components: dict[QualifiedName, Component] = {}
    package_names: set[QualifiedName] = set()
    for f in source_set.files:
        prefix = f.module_name if f.is_package else f.module_name.parent
        while prefix is not None:
            package_names.add(prefix)
            prefix = prefix.parent
    for name in package_names:
        components[name] = Component(
            name, ComponentKind.PACKAGE, name.parent, Provenance.STATIC
        )
    for f in source_set.files:
        if f.is_package:
            continue  # already a package component
        components[f.module_name] = Component(
            f.module_name,
            ComponentKind.MODULE,
            f.module_name.parent if f.module_name.parent in components else None,
            Provenance.STATIC,
        )
    for table in tables:
        for cls in table.classes:
            components[cls.name] = Component(
                cls.name, ComponentKind.CLASS, cls.parent, Provenance.STATIC
            )
    return list(components.values())


def build_static_model(
    root: Path,
    include_globs: list[str] | None = None,
    exclude_globs: list[str] | None = None,
    report: RunReport | None = None,
    jobs: int = 1,
    label: str = "static",
) -> ArchitectureModel:
    source_set = scan_project(root, include_globs, exclude_globs, report)
    return build_static_model_from_sources(source_set, report=report, jobs=jobs, label=label)


def build_static_model_from_sources(
    source_set: SourceSet,
    report: RunReport | None = None,
    jobs: int = 1,
    label: str = "static",
) -> ArchitectureModel:
    def load(f: SourceFile) -> tuple[SourceFile, ModuleExtraction | None, str | None]:
        try:
            tree = parse_source(source_set.root / f.relative_path)
        except SyntaxError as exc:
            return f, None, f"line {exc.lineno}: {exc.msg}"
        return f, extract_module(tree, f.module_name, f.is_package), None

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(load, source_set.files))
    else:
        results = [load(f) for f in source_set.files]

    # merge in sorted module order regardless of completion order
    results.sort(key=lambda r: r[0].module_name.text)
    parsed_files: list[SourceFile] = []
    tables: list[EntityTable] = []
    sites: list[RawCallSite] = []
    candidates: list[FlowCandidate] = []
    for f, extraction, failure in results:
        if extraction is None:
            if report is not None:
                report.add(PARSE_FAILURE, f.relative_path, failure or "")
            continue
        parsed_files.append(f)
        tables.append(extraction.table)
        sites.extend(extraction.call_sites)
        candidates.extend(extraction.flow_candidates)
        if report is not None:
            for target in extraction.table.star_imports:
                report.add(STAR_IMPORT, f.module_name.text, target)
            for name in extraction.table.conditional_imports:
                report.add(CONDITIONAL_IMPORT, f.module_name.text, name)

    edges, resolutions = resolve_calls(tables, sites, report)
    flows = extract_dataflow(candidates, resolutions, report)

    survivors = SourceSet(source_set.root, tuple(parsed_files))
    operations = [
        OperationEntity(fn.signature, fn.owner, fn.arity, Provenance.STATIC)
        for table in tables
        for fn in table.functions
    ]
    return ArchitectureModel.build(
        components=_component_rows(survivors, tables),
        operations=operations,
        call_edges=edges,
        dataflow_edges=flows,
        label=label,
    )


# ---------------------------------------------------------------- CSV export

def export_entity_csv(model: ArchitectureModel, out_dir: Path) -> list[Path]:
    """entities.csv, calls.csv, dataflow.csv with fixed columns, LF endings."""
    import csv

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entities_path = out_dir / "entities.csv"
    calls_path = out_dir / "calls.csv"
    dataflow_path = out_dir / "dataflow.csv"

    with entities_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["kind", "qualified_name", "owner", "arity"])
        rows = [
            (c.kind.value, c.name.text, c.parent.text if c.parent else "", "")
            for c in model.components
        ] + [
            ("operation", o.signature.text, o.owner.text, str(o.arity))
            for o in model.operations
        ]
        for row in sorted(rows, key=lambda r: r[1]):
            writer.writerow(row)

    with calls_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["caller", "callee", "provenance", "weight"])
        for e in model.call_edges:
            writer.writerow([e.caller.text, e.callee.text, e.provenance.value, str(e.weight)])

    with dataflow_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["source", "target", "kind"])
        for f in model.dataflow_edges:
            writer.writerow([f.source.text, f.target.text, f.kind.value])

    return [entities_path, calls_path, dataflow_path]
