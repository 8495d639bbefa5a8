"""Project assembly: two-pass symbol resolution over a directory of ST files.

Pass one parses every ``.st`` file and collects declarations; pass two
resolves call sites and global-variable accesses against the project-wide
symbol table.  A project directory may also carry:

* ``tasks.txt``    - one task per line: ``task <name> cycle <ms> entry <pou>``
* ``externals.txt`` - stub POU names (one per line, optional group label)
  standing in for bodies written in non-ST languages, so call graphs stay
  connected.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

from . import graphs
from .model import (
    Assignment,
    CallResolution,
    CallSite,
    CallStatement,
    CaseStatement,
    Diagnostic,
    ForStatement,
    GlobalVar,
    IfStatement,
    LineSpan,
    Pou,
    PouKind,
    Project,
    SourceRef,
    Statement,
    TaskDef,
    Token,
    TokenKind,
    TokenSeq,
    WhileStatement,
    validate_project,
)
from .stparse import SourceFile, parse_file

TASK_FILE = "tasks.txt"
EXTERNALS_FILE = "externals.txt"


class ProjectError(Exception):
    """Hard error while assembling a project (duplicate names, empty input)."""


@dataclasses.dataclass
class SymbolTable:
    """Project-wide name resolution context, keys lower-cased."""

    pou_kinds: dict[str, PouKind]
    pou_names: dict[str, str]  # lower -> as declared
    fb_types: set[str]
    globals: dict[str, str]  # lower -> as declared
    global_types: dict[str, str]  # lower -> declared type


def build_symbol_table(pous: list[Pou], globals_: list[GlobalVar]) -> SymbolTable:
    table = SymbolTable({}, {}, set(), {}, {})
    for pou in pous:
        key = pou.name.lower()
        table.pou_kinds[key] = pou.kind
        table.pou_names[key] = pou.name
        if pou.kind is PouKind.FUNCTION_BLOCK:
            table.fb_types.add(key)
    for g in globals_:
        table.globals[g.name.lower()] = g.name
        table.global_types[g.name.lower()] = g.type_name
    return table


# --- call occurrences ---------------------------------------------------------


def _scan_token_calls(tokens: TokenSeq) -> list[tuple[str, int, int]]:
    """Dotted identifier paths immediately followed by '(' in a token stream."""
    out: list[tuple[str, int, int]] = []
    i = 0
    n = len(tokens)
    while i < n:
        tok = tokens[i]
        if tok.kind is not TokenKind.IDENT:
            i += 1
            continue
        path = [tok.text]
        j = i + 1
        while (
            j + 1 < n
            and tokens[j].kind is TokenKind.OP
            and tokens[j].text == "."
            and tokens[j + 1].kind is TokenKind.IDENT
        ):
            path.append(tokens[j + 1].text)
            j += 2
        if j < n and tokens[j].kind is TokenKind.OP and tokens[j].text == "(":
            out.append((".".join(path), tok.line, tok.col))
        i = j if j > i else i + 1
    return out


def _expression_streams(statements: tuple[Statement, ...]):
    """Yield every expression token sequence in a statement tree."""
    for stmt in statements:
        if isinstance(stmt, Assignment):
            yield stmt.target
            yield stmt.value
        elif isinstance(stmt, CallStatement):
            yield stmt.args
        elif isinstance(stmt, IfStatement):
            for branch in stmt.branches:
                yield branch.condition
                yield from _expression_streams(branch.body)
            yield from _expression_streams(stmt.else_body)
        elif isinstance(stmt, CaseStatement):
            yield stmt.selector
            for branch in stmt.branches:
                yield from _expression_streams(branch.body)
            yield from _expression_streams(stmt.else_body)
        elif isinstance(stmt, ForStatement):
            yield stmt.start
            yield stmt.stop
            yield stmt.step
            yield from _expression_streams(stmt.body)
        elif isinstance(stmt, WhileStatement):
            yield stmt.condition
            yield from _expression_streams(stmt.body)


def find_call_occurrences(statements: tuple[Statement, ...]) -> list[tuple[str, int, int]]:
    """All syntactic call occurrences, in source order."""
    found: list[tuple[str, int, int]] = []

    def walk(stmts: tuple[Statement, ...]) -> None:
        for stmt in stmts:
            if isinstance(stmt, CallStatement):
                found.append((stmt.callee, stmt.line, stmt.col))
                found.extend(_scan_token_calls(stmt.args))
            elif isinstance(stmt, Assignment):
                found.extend(_scan_token_calls(stmt.target))
                found.extend(_scan_token_calls(stmt.value))
            elif isinstance(stmt, IfStatement):
                for branch in stmt.branches:
                    found.extend(_scan_token_calls(branch.condition))
                    walk(branch.body)
                walk(stmt.else_body)
            elif isinstance(stmt, CaseStatement):
                found.extend(_scan_token_calls(stmt.selector))
                for branch in stmt.branches:
                    walk(branch.body)
                walk(stmt.else_body)
            elif isinstance(stmt, ForStatement):
                for seq in (stmt.start, stmt.stop, stmt.step):
                    found.extend(_scan_token_calls(seq))
                walk(stmt.body)
            elif isinstance(stmt, WhileStatement):
                found.extend(_scan_token_calls(stmt.condition))
                walk(stmt.body)

    walk(statements)
    return found


def extract_call_sites(pou: Pou, table: SymbolTable) -> list[CallSite]:
    """Resolve every call occurrence in a POU against the symbol table.

    Resolution never fails: names that match nothing become EXTERNAL sites.
    """
    decls = pou.declared_names()
    action_names = {a.name.lower() for a in pou.actions}
    occurrences = find_call_occurrences(pou.statements)
    for action in pou.actions:
        occurrences.extend(find_call_occurrences(action.body))

    sites: list[CallSite] = []
    for callee_text, line, col in occurrences:
        base = callee_text.split(".")[0].lower()
        resolution = CallResolution.EXTERNAL
        target: str | None = None

        instance_type: str | None = None
        if base in decls:
            instance_type = decls[base].type_name
        elif base in table.global_types:
            instance_type = table.global_types[base]
        if instance_type is not None and instance_type.lower() in table.fb_types:
            resolution = CallResolution.INSTANCE_OF_FB
            target = table.pou_names[instance_type.lower()]
        elif "." not in callee_text and base in action_names:
            resolution = CallResolution.LOCAL_ACTION
            target = callee_text
        elif "." not in callee_text and base not in decls and base in table.pou_kinds:
            resolution = CallResolution.DIRECT_POU
            target = table.pou_names[base]
        sites.append(CallSite(pou.name, callee_text, resolution, target, line, col))
    return sites


# --- global accesses ----------------------------------------------------------


def _read_idents(tokens: TokenSeq, skip_first: bool = False) -> list[Token]:
    """Identifier tokens used as values: path bases not followed by '('."""
    out: list[Token] = []
    i = 0
    n = len(tokens)
    while i < n:
        tok = tokens[i]
        if tok.kind is not TokenKind.IDENT:
            i += 1
            continue
        j = i + 1
        while (
            j + 1 < n
            and tokens[j].kind is TokenKind.OP
            and tokens[j].text == "."
            and tokens[j + 1].kind is TokenKind.IDENT
        ):
            j += 2
        is_call = j < n and tokens[j].kind is TokenKind.OP and tokens[j].text == "("
        if not is_call and not (skip_first and i == 0):
            out.append(tok)
        i = j if j > i else i + 1
    return out


def extract_global_accesses(
    pou: Pou, globals_: dict[str, str]
) -> tuple[set[str], set[str]]:
    """Classify global-variable uses into (reads, writes).

    A global is written iff it is the base of an assignment target (or a FOR
    loop counter); every other value use is a read.  Locally declared names
    shadow globals of the same name.
    """
    shadowed = set(pou.declared_names())
    visible = {k: v for k, v in globals_.items() if k not in shadowed}

    reads: set[str] = set()
    writes: set[str] = set()

    def note_read(tokens: TokenSeq, skip_first: bool = False) -> None:
        for tok in _read_idents(tokens, skip_first=skip_first):
            name = visible.get(tok.text.lower())
            if name is not None:
                reads.add(name)

    def note_write(name_text: str) -> None:
        name = visible.get(name_text.lower())
        if name is not None:
            writes.add(name)

    def walk(stmts: tuple[Statement, ...]) -> None:
        for stmt in stmts:
            if isinstance(stmt, Assignment):
                if stmt.target and stmt.target[0].kind is TokenKind.IDENT:
                    note_write(stmt.target[0].text)
                # index expressions on the target are value uses
                note_read(stmt.target, skip_first=True)
                note_read(stmt.value)
            elif isinstance(stmt, CallStatement):
                note_read(stmt.args)
            elif isinstance(stmt, IfStatement):
                for branch in stmt.branches:
                    note_read(branch.condition)
                    walk(branch.body)
                walk(stmt.else_body)
            elif isinstance(stmt, CaseStatement):
                note_read(stmt.selector)
                for branch in stmt.branches:
                    walk(branch.body)
                walk(stmt.else_body)
            elif isinstance(stmt, ForStatement):
                note_write(stmt.var)
                note_read(stmt.start)
                note_read(stmt.stop)
                note_read(stmt.step)
                walk(stmt.body)
            elif isinstance(stmt, WhileStatement):
                note_read(stmt.condition)
                walk(stmt.body)

    walk(pou.statements)
    for action in pou.actions:
        walk(action.body)
    return reads, writes


# --- manifest files -----------------------------------------------------------


def parse_task_file(text: str, path: str) -> tuple[list[TaskDef], list[Diagnostic]]:
    tasks: list[TaskDef] = []
    diags: list[Diagnostic] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if (
            len(parts) != 6
            or parts[0].lower() != "task"
            or parts[2].lower() != "cycle"
            or parts[4].lower() != "entry"
        ):
            diags.append(
                Diagnostic(
                    "error",
                    "expected 'task <name> cycle <ms> entry <pou>'",
                    path=path,
                    line=lineno,
                )
            )
            continue
        try:
            cycle = int(parts[3])
        except ValueError:
            diags.append(
                Diagnostic("error", f"bad cycle time {parts[3]!r}", path=path, line=lineno)
            )
            continue
        tasks.append(TaskDef(parts[1], cycle, parts[5]))
    return tasks, diags


def parse_externals_file(text: str) -> list[tuple[str, str | None]]:
    """Stub declarations: ``<name>`` or ``<name> <group>`` per line."""
    stubs: list[tuple[str, str | None]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 1)
        stubs.append((parts[0], parts[1].strip() if len(parts) > 1 else None))
    return stubs


def parse_project(directory: str | Path, name: str | None = None) -> tuple[Project, list[Diagnostic]]:
    """Parse a project directory into a resolved, validated Project.

    Raises ProjectError on hard errors (no sources, duplicate POU names);
    recoverable problems come back as diagnostics next to the project.
    """
    root = Path(directory)
    if not root.is_dir():
        raise ProjectError(f"{root}: not a directory")
    st_files = sorted(p for p in root.iterdir() if p.suffix.lower() == ".st")
    if not st_files:
        raise ProjectError(f"{root}: no source files")

    diagnostics: list[Diagnostic] = []
    pous: list[Pou] = []
    globals_: list[GlobalVar] = []
    origin: dict[str, str] = {}
    source_index: dict[str, SourceRef] = {}

    for path in st_files:
        text = path.read_text(encoding="utf-8")
        result = parse_file(SourceFile(str(path), text))
        diagnostics.extend(result.diagnostics)
        for pou in result.pous:
            key = pou.name.lower()
            if key in origin:
                raise ProjectError(
                    f"duplicate POU {pou.name!r} declared in {origin[key]} and {path}"
                )
            origin[key] = str(path)
            source_index[pou.name] = SourceRef(str(path), pou.span)
            pous.append(pou)
        for g in result.globals:
            if g.name.lower() in {x.name.lower() for x in globals_}:
                diagnostics.append(
                    Diagnostic(
                        "warning",
                        f"global {g.name!r} declared more than once",
                        path=str(path),
                    )
                )
                continue
            globals_.append(g)

    externals_path = root / EXTERNALS_FILE
    if externals_path.exists():
        for stub_name, group in parse_externals_file(
            externals_path.read_text(encoding="utf-8")
        ):
            key = stub_name.lower()
            if key in origin:
                diagnostics.append(
                    Diagnostic(
                        "warning",
                        f"external stub {stub_name!r} shadows a parsed POU; ignored",
                        path=str(externals_path),
                    )
                )
                continue
            origin[key] = str(externals_path)
            stub = Pou(
                name=stub_name,
                kind=PouKind.FUNCTION_BLOCK,
                stub=True,
                group=group,
            )
            source_index[stub_name] = SourceRef(str(externals_path), LineSpan(1, 1))
            pous.append(stub)

    tasks: list[TaskDef] = []
    task_path = root / TASK_FILE
    if task_path.exists():
        tasks, task_diags = parse_task_file(
            task_path.read_text(encoding="utf-8"), str(task_path)
        )
        diagnostics.extend(task_diags)
    else:
        diagnostics.append(
            Diagnostic("warning", f"no {TASK_FILE}; project has zero tasks", path=str(root))
        )

    table = build_symbol_table(pous, globals_)
    global_names = {g.name.lower(): g.name for g in globals_}

    resolved: list[Pou] = []
    for pou in pous:
        sites = extract_call_sites(pou, table)
        reads, writes = extract_global_accesses(pou, global_names)
        resolved.append(
            dataclasses.replace(
                pou,
                call_sites=tuple(sites),
                global_reads=frozenset(reads),
                global_writes=frozenset(writes),
                complexity=graphs.complexity(pou),
            )
        )

    project = Project(
        name=name or root.name,
        pous=tuple(resolved),
        globals=tuple(globals_),
        tasks=tuple(tasks),
        source_index=source_index,
    )
    diagnostics.extend(validate_project(project))
    return project, diagnostics
