"""Conservative effect scanning of skill scripts via per-language rule packs.

The scanner is flow-insensitive by design: a rule match anywhere in the
comment-stripped source contributes its effect, including dead code, and any
reflective construct taints the whole program to Top. That over-approximation
is the point; precision upgrades must never remove the conservativity.

String literals survive comment stripping (arguments are extracted from
them), so constructs inside strings still count toward the effect set.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from pathlib import Path
from typing import Any, Iterable, Mapping

from ._version import __version__
from .canonical import document_hash
from .errors import MalformedPattern, PackError
from .lattice import (
    EMPTY_EFFECT_SET,
    AbstractValue,
    ContainmentVerdict,
    EffectSet,
    EffectTuple,
    HostGlob,
    Opaque,
    PathPrefix,
    Provenance,
    TOP,
    containment_check,
    effect_set_to_json,
    effects_join,
    make_effect_set,
    value_leq,
    verdict_to_json,
)
from .manifest import Manifest, is_known_kind

LANGUAGE_EXTENSIONS = {
    ".py": "python",
    ".sh": "shell",
    ".mjs": "node",
    ".js": "node",
    ".ts": "node",
}

LANGUAGES = ("python", "shell", "node")


@dataclass(frozen=True)
class Script:
    id: str
    language: str
    source: str
    decode_ok: bool = True


def discover_scripts(skill_dir: Path | str) -> list[Script]:
    """Every file under ``skill_dir`` with a known language extension,
    excluding the ``evidence/`` subdirectory, in lexicographic order of
    relative path."""
    skill_dir = Path(skill_dir)
    if not skill_dir.is_dir():
        raise FileNotFoundError(f"skill directory {skill_dir} does not exist")
    scripts: list[Script] = []
    paths = sorted(
        p for p in skill_dir.rglob("*")
        if p.is_file() and p.suffix in LANGUAGE_EXTENSIONS
    )
    for path in paths:
        rel = path.relative_to(skill_dir).as_posix()
        if rel == "SKILL.md" or rel.split("/", 1)[0] == "evidence":
            continue
        raw = path.read_bytes()
        try:
            source, decode_ok = raw.decode("utf-8"), True
        except UnicodeDecodeError:
            source, decode_ok = "", False
        scripts.append(Script(rel, LANGUAGE_EXTENSIONS[path.suffix], source, decode_ok))
    return scripts


# ---------------------------------------------------------------------------
# Comment stripping (layout-preserving: comments are blanked, never removed,
# so provenance line numbers refer to the original file)
# ---------------------------------------------------------------------------


def _strip_python(source: str) -> str:
    out = list(source)
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c == "#":
            while i < n and source[i] != "\n":
                out[i] = " "
                i += 1
        elif c in "'\"":
            quote = c
            if source.startswith(quote * 3, i):
                i += 3
                while i < n:
                    if source[i] == "\\":
                        i += 2
                        continue
                    if source.startswith(quote * 3, i):
                        i += 3
                        break
                    i += 1
            else:
                i += 1
                while i < n and source[i] != "\n":
                    if source[i] == "\\":
                        i += 2
                        continue
                    if source[i] == quote:
                        i += 1
                        break
                    i += 1
        else:
            i += 1
    return "".join(out)


def _strip_shell(source: str) -> str:
    out = list(source)
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c == "\\":
            i += 2
        elif c == "'":
            i += 1
            while i < n and source[i] != "'":
                i += 1
            i += 1
        elif c == '"':
            i += 1
            while i < n and source[i] != '"':
                if source[i] == "\\":
                    i += 2
                    continue
                i += 1
            i += 1
        elif c == "#" and (i == 0 or source[i - 1] in " \t\n;|&("):
            while i < n and source[i] != "\n":
                out[i] = " "
                i += 1
        else:
            i += 1
    return "".join(out)


_NODE_REGEX_PREFIX = set("=([{,;:!&|?+-*%~^<>")


def _strip_node(source: str) -> str:
    out = list(source)
    i, n = 0, len(source)
    prev_sig = ""  # last significant char, for the division/regex heuristic
    while i < n:
        c = source[i]
        if c in "'\"":
            prev_sig = c
            i += 1
            while i < n and source[i] != "\n":
                if source[i] == "\\":
                    i += 2
                    continue
                if source[i] == c:
                    i += 1
                    break
                i += 1
        elif c == "`":
            prev_sig = c
            i += 1
            while i < n:
                if source[i] == "\\":
                    i += 2
                    continue
                if source[i] == "`":
                    i += 1
                    break
                i += 1
        elif c == "/":
            nxt = source[i + 1] if i + 1 < n else ""
            if nxt == "/":
                while i < n and source[i] != "\n":
                    out[i] = " "
                    i += 1
            elif nxt == "*":
                out[i] = " "
                out[i + 1] = " "
                i += 2
                while i < n:
                    if source.startswith("*/", i):
                        out[i] = " "
                        out[i + 1] = " "
                        i += 2
                        break
                    if source[i] != "\n":
                        out[i] = " "
                    i += 1
            elif prev_sig in _NODE_REGEX_PREFIX or prev_sig == "":
                # regex literal: keep its text, just skip past it
                i += 1
                in_class = False
                while i < n and source[i] != "\n":
                    ch = source[i]
                    if ch == "\\":
                        i += 2
                        continue
                    if ch == "[":
                        in_class = True
                    elif ch == "]":
                        in_class = False
                    elif ch == "/" and not in_class:
                        i += 1
                        break
                    i += 1
                prev_sig = "/"
            else:
                prev_sig = "/"
                i += 1
        else:
            if not c.isspace():
                prev_sig = c
            i += 1
    return "".join(out)


_STRIPPERS = {"python": _strip_python, "shell": _strip_shell, "node": _strip_node}


def strip_comments(source: str, language: str) -> str:
    try:
        return _STRIPPERS[language](source)
    except KeyError:
        raise PackError(f"unknown language {language!r}") from None


# ---------------------------------------------------------------------------
# Call-argument lexing (python and node)
#
# Parts are ("lit", text) / ("hole", expr) sequences; holes are f-string or
# template-literal interpolations.
# ---------------------------------------------------------------------------

Parts = tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class ParsedArg:
    kind: str  # "literal" | "list" | "nonliteral" | "absent"
    parts: Parts = ()
    end: int = 0


_SCAN_CAP = 2000


def _read_string(text: str, i: int, language: str) -> tuple[Parts, int] | None:
    n = len(text)
    is_format = False
    raw = False
    start = i
    if language == "python":
        j = i
        prefix = ""
        while j < n and len(prefix) < 3 and text[j] in "fFrRbBuU":
            prefix += text[j]
            j += 1
        if j < n and text[j] in "'\"":
            is_format = "f" in prefix.lower()
            raw = "r" in prefix.lower()
            i = j
        elif prefix:
            return None
    if i >= n or text[i] not in ("'\"`" if language == "node" else "'\""):
        return None
    quote = text[i]
    template = quote == "`"
    triple = language == "python" and text.startswith(quote * 3, i)
    i += 3 if triple else 1
    parts: list[tuple[str, str]] = []
    lit: list[str] = []

    def flush() -> None:
        if lit:
            parts.append(("lit", "".join(lit)))
            lit.clear()

    while i < n and i - start < _SCAN_CAP:
        c = text[i]
        if c == "\\":
            nxt = text[i + 1] if i + 1 < n else ""
            if raw:
                lit.append(c)
                lit.append(nxt)
            elif nxt in ("\\", "'", '"', "`"):
                lit.append(nxt)
            elif nxt == "\n":
                pass  # line continuation
            else:
                lit.append(c)
                lit.append(nxt)
            i += 2
            continue
        if triple:
            if text.startswith(quote * 3, i):
                flush()
                return tuple(parts), i + 3
        elif c == quote:
            flush()
            return tuple(parts), i + 1
        elif c == "\n" and not template:
            break  # unterminated single-line string
        if is_format and c == "{":
            if text.startswith("{{", i):
                lit.append("{")
                i += 2
                continue
            flush()
            depth, j = 1, i + 1
            expr: list[str] = []
            while j < n and depth:
                if text[j] == "{":
                    depth += 1
                elif text[j] == "}":
                    depth -= 1
                    if not depth:
                        break
                expr.append(text[j])
                j += 1
            parts.append(("hole", "".join(expr)))
            i = j + 1
            continue
        if is_format and text.startswith("}}", i):
            lit.append("}")
            i += 2
            continue
        if template and text.startswith("${", i):
            flush()
            depth, j = 1, i + 2
            expr = []
            while j < n and depth:
                if text[j] == "{":
                    depth += 1
                elif text[j] == "}":
                    depth -= 1
                    if not depth:
                        break
                expr.append(text[j])
                j += 1
            parts.append(("hole", "".join(expr)))
            i = j + 1
            continue
        lit.append(c)
        i += 1
    flush()
    return tuple(parts), i  # unterminated; best-effort


def _scan_to_arg_end(text: str, i: int) -> int:
    """Position of the ``,`` or ``)`` closing the current argument."""
    n = len(text)
    depth = 0
    steps = 0
    while i < n and steps < _SCAN_CAP:
        c = text[i]
        if c in "([{":
            depth += 1
        elif c in ")]}":
            if depth == 0:
                return i
            depth -= 1
        elif c == "," and depth == 0:
            return i
        elif c in "'\"`":
            read = _read_string(text, i, "node" if c == "`" else "python")
            if read:
                i = read[1]
                steps += 1
                continue
        i += 1
        steps += 1
    return i


def _skip_ws(text: str, i: int) -> int:
    while i < len(text) and text[i] in " \t\r\n":
        i += 1
    return i


def read_call_argument(text: str, pos: int, language: str) -> ParsedArg:
    """Parse the argument expression starting at ``pos`` (just past the
    opening paren or a comma). String literals and flat lists of string
    literals are recovered; everything else is non-literal."""
    i = _skip_ws(text, pos)
    n = len(text)
    if i >= n or text[i] in "),":
        return ParsedArg("absent", (), i)
    read = _read_string(text, i, language)
    if read:
        parts, j = read
        j = _skip_ws(text, j)
        if j >= n or text[j] in "),":
            return ParsedArg("literal", parts, j)
        return ParsedArg("nonliteral", (), _scan_to_arg_end(text, j))
    if text[i] == "[":
        j = _skip_ws(text, i + 1)
        parts: list[tuple[str, str]] = []
        while j < n:
            if text[j] == "]":
                return ParsedArg("list", tuple(parts), _skip_ws(text, j + 1))
            element = _read_string(text, j, language)
            if not element:
                return ParsedArg("nonliteral", (), _scan_to_arg_end(text, i))
            if parts:
                parts.append(("lit", " "))
            parts.extend(element[0])
            j = _skip_ws(text, element[1])
            if j < n and text[j] == ",":
                j = _skip_ws(text, j + 1)
        return ParsedArg("nonliteral", (), _scan_to_arg_end(text, i))
    return ParsedArg("nonliteral", (), _scan_to_arg_end(text, i))


# ---------------------------------------------------------------------------
# Argument abstraction
# ---------------------------------------------------------------------------


def abstract_url(parts: Parts) -> AbstractValue:
    """Host summary of a URL literal or template.

    A template whose interpolations are confined to the leftmost host label
    abstracts to a ``*.suffix`` glob (interpolated values are assumed not to
    carry URL metacharacters); any other interpolation degrades to Top.
    """
    if not parts or parts[0][0] != "lit":
        return TOP
    first = parts[0][1]
    for scheme in ("https://", "http://"):
        if first.lower().startswith(scheme):
            first = first[len(scheme):]
            break
    else:
        return TOP
    items: list[tuple[str, str]] = [("lit", first)] + list(parts[1:])
    host_items: list[tuple[str, str]] = []
    for typ, text in items:
        if typ == "hole":
            host_items.append((typ, text))
            continue
        cut = next((k for k, ch in enumerate(text) if ch in "/:?#"), len(text))
        host_items.append(("lit", text[:cut]))
        if cut < len(text):
            break
    if not any(typ == "hole" for typ, _ in host_items):
        host = "".join(text for _, text in host_items)
        if not host:
            return TOP
        try:
            return HostGlob(host)
        except MalformedPattern:
            return TOP
    seen_dot = False
    suffix = ""
    for typ, text in host_items:
        if typ == "hole":
            if seen_dot:
                return TOP
            continue
        if not seen_dot:
            dot = text.find(".")
            if dot != -1:
                seen_dot = True
                suffix = text[dot:]
        else:
            suffix += text
    if not seen_dot or len(suffix) < 2:
        return TOP
    try:
        return HostGlob("*" + suffix)
    except MalformedPattern:
        return TOP


def abstract_path(parts: Parts) -> AbstractValue:
    """Path summary: a full literal stays exact; a template keeps its literal
    directory prefix (up to the last ``/`` before the first interpolation)."""
    if not parts:
        return TOP
    if not any(typ == "hole" for typ, _ in parts):
        text = "".join(t for _, t in parts)
        if not text:
            return TOP
        try:
            return PathPrefix(text)
        except MalformedPattern:
            return TOP
    if parts[0][0] != "lit":
        return TOP
    head = parts[0][1]
    slash = head.rfind("/")
    if slash == -1:
        return TOP
    try:
        return PathPrefix(head[: slash + 1])
    except MalformedPattern:
        return TOP


def abstract_opaque(parts: Parts) -> AbstractValue:
    if parts and not any(typ == "hole" for typ, _ in parts):
        text = "".join(t for _, t in parts)
        if text:
            return Opaque(text)
    return TOP


def _literal_command(arg: ParsedArg) -> str | None:
    if arg.kind not in ("literal", "list"):
        return None
    if any(typ == "hole" for typ, _ in arg.parts):
        return None
    text = "".join(t for _, t in arg.parts)
    return text or None


def resolve_spawn_target(command: str, known_scripts: frozenset[str]) -> str | None:
    """A spawn target counts as internal only when a command token literally
    names a sibling script."""
    for token in command.split():
        candidate = token[2:] if token.startswith("./") else token
        if token in known_scripts:
            return token
        if candidate in known_scripts:
            return candidate
    return None


# ---------------------------------------------------------------------------
# Shell-line helpers
# ---------------------------------------------------------------------------

_SHELL_URL_RE = re.compile(r"""https?://[^\s'"`;|&)>]+""")
_SHELL_HOLE_RE = re.compile(r"\$\{[^}]*\}|\$\w+")
_SHELL_TOKEN_RE = re.compile(r"""'[^']*'|"[^"]*"|[^\s;|&<>]+""")


def _shell_parts(token: str) -> Parts:
    if token.startswith("'") and token.endswith("'") and len(token) >= 2:
        return (("lit", token[1:-1]),)
    if token.startswith('"') and token.endswith('"') and len(token) >= 2:
        token = token[1:-1]
    parts: list[tuple[str, str]] = []
    pos = 0
    for m in _SHELL_HOLE_RE.finditer(token):
        if m.start() > pos:
            parts.append(("lit", token[pos : m.start()]))
        parts.append(("hole", m.group()))
        pos = m.end()
    if pos < len(token):
        parts.append(("lit", token[pos:]))
    return tuple(parts)


def _shell_line_rest(text: str, pos: int) -> str:
    end = text.find("\n", pos)
    return text[pos:] if end == -1 else text[pos:end]


def _shell_first_token(rest: str, skip_flags: bool = True) -> str | None:
    for m in _SHELL_TOKEN_RE.finditer(rest):
        token = m.group()
        if skip_flags and token.startswith("-"):
            continue
        return token
    return None


# ---------------------------------------------------------------------------
# Rule packs
# ---------------------------------------------------------------------------

_EXTRACTORS = (
    "taint_top",
    "url_host",
    "path",
    "python_open",
    "spawn",
    "const_top",
    "shell_url",
    "shell_path",
    "shell_redirect",
    "shell_spawn",
)


@dataclass(frozen=True)
class Rule:
    rule_id: str
    pattern: str
    extract: str
    kind: str | None = None
    reversible: bool = False

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "rule_id": self.rule_id,
            "pattern": self.pattern,
            "extract": self.extract,
        }
        if self.kind is not None:
            doc["kind"] = self.kind
        if self.reversible:
            doc["reversible"] = True
        return doc


@dataclass(frozen=True)
class RulePack:
    language: str
    version: str
    rules: tuple[Rule, ...]
    reversible_prefixes: tuple[str, ...] = ("./.cache/", "./tmp/")
    pack_hash: str = field(init=False, default="")

    def __post_init__(self) -> None:
        if self.language not in LANGUAGES:
            raise PackError(f"unknown rule-pack language {self.language!r}")
        seen: set[str] = set()
        for rule in self.rules:
            if rule.rule_id in seen:
                raise PackError(f"duplicate rule_id {rule.rule_id!r}")
            seen.add(rule.rule_id)
            if rule.extract not in _EXTRACTORS:
                raise PackError(f"{rule.rule_id}: unknown extractor {rule.extract!r}")
            if rule.kind is not None and rule.kind != "fs.write" and not is_known_kind(rule.kind):
                raise PackError(f"{rule.rule_id}: unknown kind {rule.kind!r}")
            try:
                _compile(rule.pattern)
            except re.error as exc:
                raise PackError(f"{rule.rule_id}: bad pattern: {exc}") from exc
        object.__setattr__(self, "pack_hash", document_hash(self.to_dict()))

    def to_dict(self) -> dict[str, Any]:
        return {
            "language": self.language,
            "version": self.version,
            "reversible_prefixes": list(self.reversible_prefixes),
            "rules": [r.to_dict() for r in self.rules],
        }


def rule_pack_from_dict(doc: Mapping[str, Any]) -> RulePack:
    try:
        rules = tuple(
            Rule(
                rule_id=r["rule_id"],
                pattern=r["pattern"],
                extract=r["extract"],
                kind=r.get("kind"),
                reversible=bool(r.get("reversible", False)),
            )
            for r in doc["rules"]
        )
        return RulePack(
            language=doc["language"],
            version=doc["version"],
            rules=rules,
            reversible_prefixes=tuple(doc.get("reversible_prefixes", ("./.cache/", "./tmp/"))),
        )
    except (KeyError, TypeError) as exc:
        raise PackError(f"malformed rule pack: {exc}") from exc


def load_rule_pack(path: Path | str) -> RulePack:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise PackError(f"{path}: cannot load rule pack: {exc}") from exc
    return rule_pack_from_dict(doc)


def load_rule_packs(directory: Path | str) -> tuple[RulePack, ...]:
    directory = Path(directory)
    if not directory.is_dir():
        raise PackError(f"rule-pack directory {directory} does not exist")
    packs = tuple(load_rule_pack(p) for p in sorted(directory.glob("*.json")))
    if not packs:
        raise PackError(f"no rule packs found under {directory}")
    return packs


def default_rule_packs() -> tuple[RulePack, ...]:
    python = RulePack(
        language="python",
        version="1",
        rules=(
            Rule("py.net.requests", r"\brequests\s*\.\s*(?:get|post)\s*\(", "url_host", "net.egress"),
            Rule("py.fs.open", r"\bopen\s*\(", "python_open"),
            Rule("py.spawn.subprocess", r"\bsubprocess\s*\.\s*\w+\s*\(", "spawn", "spawn.proc"),
            Rule("py.spawn.os-system", r"\bos\s*\.\s*system\s*\(", "spawn", "spawn.proc"),
            Rule("py.taint.eval", r"\beval\s*\(", "taint_top"),
            Rule("py.taint.exec", r"\bexec\s*\(", "taint_top"),
            Rule("py.taint.dynimport", r"\b__import__\s*\(", "taint_top"),
        ),
    )
    shell = RulePack(
        language="shell",
        version="1",
        rules=(
            Rule("sh.net.curl", r"\b(?:curl|wget)\b", "shell_url", "net.egress"),
            Rule("sh.fs.redirect", r"(?<![<>=!])>{1,2}", "shell_redirect", "fs.write"),
            Rule("sh.fs.rm", r"\brm\b", "shell_path", "fs.write"),
            Rule("sh.fs.tee", r"\btee\b", "shell_path", "fs.write"),
            Rule("sh.fs.cat", r"\bcat\b", "shell_path", "fs.read"),
            Rule("sh.fs.read-builtin", r"\bread\b", "const_top", "fs.read"),
            Rule("sh.taint.eval", r"\beval\b", "taint_top"),
            Rule("sh.taint.source-var", r"(?:^|[;|&\s])(?:source|\.)\s+[\"']?\$", "taint_top"),
            Rule("sh.spawn.interp", r"\b(?:bash|sh|python[0-9.]*|node)\s+", "shell_spawn", "spawn.proc"),
        ),
    )
    node = RulePack(
        language="node",
        version="1",
        rules=(
            Rule("nd.net.fetch", r"\bfetch\s*\(", "url_host", "net.egress"),
            Rule("nd.net.http", r"\bhttps?\s*\.\s*(?:request|get)\s*\(", "url_host", "net.egress"),
            Rule("nd.fs.read", r"\bfs(?:\s*\.\s*promises)?\s*\.\s*readFile(?:Sync)?\s*\(", "path", "fs.read"),
            Rule("nd.fs.write", r"\bfs(?:\s*\.\s*promises)?\s*\.\s*(?:writeFile|appendFile)(?:Sync)?\s*\(", "path", "fs.write"),
            Rule("nd.spawn.child", r"\bchild_process\s*\.\s*(?:exec|execSync|execFile|execFileSync|spawn|spawnSync|fork)\s*\(", "spawn", "spawn.proc"),
            Rule("nd.taint.eval", r"\beval\s*\(", "taint_top"),
            Rule("nd.taint.newfunc", r"\bnew\s+Function\s*\(", "taint_top"),
            Rule("nd.taint.dynimport", r"\bimport\s*\(", "taint_top"),
        ),
    )
    return (python, shell, node)


@lru_cache(maxsize=256)
def _compile(pattern: str) -> re.Pattern[str]:
    return re.compile(pattern, re.MULTILINE)


# ---------------------------------------------------------------------------
# Scanning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScriptScan:
    effects: EffectSet
    spawn_edges: frozenset[str]


def _classify_write(arg: AbstractValue, rule: Rule, pack: RulePack) -> str:
    if rule.reversible:
        return "fs.write.rev"
    if isinstance(arg, PathPrefix):
        for prefix in pack.reversible_prefixes:
            try:
                if value_leq(arg, PathPrefix(prefix)):
                    return "fs.write.rev"
            except MalformedPattern:
                continue
    return "fs.write.irrev"


def _open_mode(text: str, pos: int, language: str) -> str | None:
    """Mode of an ``open`` call whose first argument ended at ``pos``;
    None means unknown (non-literal)."""
    i = _skip_ws(text, pos)
    if i >= len(text) or text[i] != ",":
        return "r"
    i = _skip_ws(text, i + 1)
    kw = re.compile(r"mode\s*=\s*").match(text, i)
    if kw:
        i = kw.end()
    arg = read_call_argument(text, i, language)
    if arg.kind == "absent":
        return "r"
    if arg.kind == "literal" and not any(t == "hole" for t, _ in arg.parts):
        return "".join(t for _, t in arg.parts)
    return None


def scan_script(
    script: Script,
    pack: RulePack,
    known_scripts: frozenset[str] = frozenset(),
) -> ScriptScan:
    """Run every rule of ``pack`` over the comment-stripped source.

    Unanalyzable constructs degrade to Top (never to an exception); the
    result is a pure function of (source, pack, known_scripts).
    """
    if script.language != pack.language:
        raise PackError(
            f"pack language {pack.language!r} does not match script {script.id!r}"
        )
    if not script.decode_ok:
        origin = Provenance(script.id, 0, "undecodable-source")
        return ScriptScan(make_effect_set((), True, (origin,)), frozenset())

    text = strip_comments(script.source, script.language)
    effects: list[EffectTuple] = []
    taints: list[Provenance] = []
    edges: set[str] = set()

    def emit(kind: str, arg: AbstractValue, prov: Provenance) -> None:
        effects.append(EffectTuple(kind, arg, prov))

    for rule in pack.rules:
        for m in _compile(rule.pattern).finditer(text):
            line = text.count("\n", 0, m.start()) + 1
            prov = Provenance(script.id, line, rule.rule_id)
            extract = rule.extract
            if extract == "taint_top":
                taints.append(prov)
            elif extract == "const_top":
                emit(rule.kind or "tool.invoke", TOP, prov)
            elif extract == "url_host":
                arg = read_call_argument(text, m.end(), script.language)
                value = abstract_url(arg.parts) if arg.kind == "literal" else TOP
                emit(rule.kind or "net.egress", value, prov)
            elif extract == "path":
                arg = read_call_argument(text, m.end(), script.language)
                value = abstract_path(arg.parts) if arg.kind == "literal" else TOP
                kind = rule.kind or "fs.read"
                if kind == "fs.write":
                    kind = _classify_write(value, rule, pack)
                emit(kind, value, prov)
            elif extract == "python_open":
                arg = read_call_argument(text, m.end(), script.language)
                value = abstract_path(arg.parts) if arg.kind == "literal" else TOP
                mode = _open_mode(text, arg.end, script.language)
                wants_write = mode is None or any(c in mode for c in "wax+")
                wants_read = mode is None or "r" in (mode or "") or "+" in (mode or "")
                if not wants_read and not wants_write:
                    wants_read = True  # unrecognized literal mode: treat as read
                if wants_read:
                    emit("fs.read", value, prov)
                if wants_write:
                    emit(_classify_write(value, rule, pack), value, prov)
            elif extract == "spawn":
                arg = read_call_argument(text, m.end(), script.language)
                command = _literal_command(arg)
                if command is None:
                    emit("spawn.proc", TOP, prov)
                    taints.append(prov)
                else:
                    emit("spawn.proc", Opaque(command), prov)
                    target = resolve_spawn_target(command, known_scripts)
                    if target is not None:
                        edges.add(target)
                    else:
                        taints.append(prov)
            elif extract == "shell_url":
                rest = _shell_line_rest(text, m.end())
                url = _SHELL_URL_RE.search(rest)
                value = abstract_url(_shell_parts(url.group())) if url else TOP
                emit(rule.kind or "net.egress", value, prov)
            elif extract in ("shell_path", "shell_redirect"):
                rest = _shell_line_rest(text, m.end())
                token = _shell_first_token(rest, skip_flags=extract == "shell_path")
                value = abstract_path(_shell_parts(token)) if token else TOP
                kind = rule.kind or "fs.read"
                if kind == "fs.write":
                    kind = _classify_write(value, rule, pack)
                emit(kind, value, prov)
            elif extract == "shell_spawn":
                rest = _shell_line_rest(text, m.end())
                token = _shell_first_token(rest)
                if token is None or any(t == "hole" for t, _ in _shell_parts(token)):
                    emit("spawn.proc", TOP, prov)
                    taints.append(prov)
                else:
                    command = "".join(t for _, t in _shell_parts(token))
                    emit("spawn.proc", Opaque(command), prov)
                    target = resolve_spawn_target(command, known_scripts)
                    if target is not None:
                        edges.add(target)
                    else:
                        taints.append(prov)

    return ScriptScan(
        make_effect_set(effects, tainted_top=bool(taints), taint_origins=taints),
        frozenset(edges),
    )


def analyze_script(
    script: Script,
    pack: RulePack,
    known_scripts: frozenset[str] = frozenset(),
) -> EffectSet:
    """The effect summary of one script under one rule pack."""
    return scan_script(script, pack, known_scripts).effects


def spawn_closure(
    reports: Mapping[str, EffectSet],
    spawn_edges: Mapping[str, Iterable[str]],
) -> dict[str, EffectSet]:
    """Join each parent's effects with the transitive closure of its spawned
    children; cycles converge because join is idempotent."""

    def reachable(root: str) -> set[str]:
        seen: set[str] = set()
        stack = list(spawn_edges.get(root, ()))
        while stack:
            node = stack.pop()
            if node in seen or node == root:
                continue
            seen.add(node)
            stack.extend(spawn_edges.get(node, ()))
        return seen

    result: dict[str, EffectSet] = {}
    for script_id, effects in reports.items():
        joined = effects
        for child in sorted(reachable(script_id)):
            if child in reports:
                joined = effects_join(joined, reports[child])
        result[script_id] = joined
    return result


# ---------------------------------------------------------------------------
# The full Method A run
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnalyzerIdentity:
    name: str
    version: str
    pack_hashes: tuple[str, ...]


@dataclass(frozen=True)
class StaticReport:
    per_script: dict[str, EffectSet]
    verdict: ContainmentVerdict
    analyzer: AnalyzerIdentity

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "analyzer": {
                "name": self.analyzer.name,
                "version": self.analyzer.version,
                "pack_hashes": list(self.analyzer.pack_hashes),
            },
            "per_script": {
                script_id: effect_set_to_json(effects)
                for script_id, effects in self.per_script.items()
            },
            "verdict": verdict_to_json(self.verdict),
        }


def method_a(
    skill_dir: Path | str,
    manifest: Manifest,
    packs: Iterable[RulePack] | None = None,
) -> StaticReport:
    """Discover scripts, scan each under its language pack, close over spawn
    edges, and check containment against the declared capability set.

    A script whose language has no covering pack conservatively taints the
    verdict with a named "unanalyzable-language" violation.
    """
    packs = tuple(packs) if packs is not None else default_rule_packs()
    pack_map: dict[str, RulePack] = {}
    for pack in packs:
        if pack.language in pack_map:
            raise PackError(f"multiple rule packs for language {pack.language!r}")
        pack_map[pack.language] = pack

    scripts = discover_scripts(skill_dir)
    known = frozenset(s.id for s in scripts)
    per_script: dict[str, EffectSet] = {}
    edges: dict[str, frozenset[str]] = {}
    for script in scripts:
        pack = pack_map.get(script.language)
        if pack is None:
            origin = Provenance(script.id, 0, "unanalyzable-language")
            per_script[script.id] = make_effect_set((), True, (origin,))
            edges[script.id] = frozenset()
        else:
            scan = scan_script(script, pack, known)
            per_script[script.id] = scan.effects
            edges[script.id] = scan.spawn_edges

    per_script = spawn_closure(per_script, edges)
    combined = reduce(effects_join, per_script.values(), EMPTY_EFFECT_SET)
    verdict = containment_check(combined, manifest.caps)
    analyzer = AnalyzerIdentity(
        name="skillproof-static",
        version=__version__,
        pack_hashes=tuple(p.pack_hash for p in sorted(packs, key=lambda p: p.language)),
    )
    return StaticReport(per_script=per_script, verdict=verdict, analyzer=analyzer)
