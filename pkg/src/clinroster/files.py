"""On-disk formats: the JSON instance schema and the schedule CSV.

Instance files are versioned (``"format": 1``).  Errors carry the line of the
offending field so a hand-edited file can be fixed without guesswork.

The schedule CSV has one row per week (``B * block_size_weeks`` rows) with a
week number, one column per service and a weekend column; weekend ``w`` sits
on the row of week ``w``.  Block cells repeat for every week of the block.
Writing, parsing and writing again reproduces the same bytes.
"""

from __future__ import annotations

import csv
import io
import json
from json.decoder import JSONObject
from json.scanner import py_make_scanner
from pathlib import Path

from .model import AdjacencyMap, Clinician, NcbMode, ObjectiveWeights, ProblemInstance
from .validator import Schedule

FORMAT_VERSION = 1
WEEK_HEADER = "Week #"
WEEKEND_HEADER = "Weekend"


class FormatError(ValueError):
    """Malformed input file.  ``line`` is 1-based, or None if unknown."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = source or "<input>"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}")


# ---------------------------------------------------------------- JSON


class _Obj(dict):
    """A JSON object that remembers where it sits in the source text."""

    text: str = ""
    start: int = 0
    end: int = 0

    def line_of(self, key: str | None = None) -> int:
        pos = self.start
        if key is not None:
            hit = self.text.find(json.dumps(key), self.start, self.end)
            if hit >= 0:
                pos = hit
        return self.text.count("\n", 0, pos) + 1


def _loads_with_positions(text: str):
    decoder = json.JSONDecoder()

    def parse_object(s_and_end, strict, scan_once, object_hook, object_pairs_hook, memo=None):
        s, end = s_and_end
        pairs, new_end = JSONObject(s_and_end, strict, scan_once, None, None, memo)
        obj = _Obj(pairs)
        obj.text, obj.start, obj.end = s, end - 1, new_end
        return obj, new_end

    decoder.parse_object = parse_object
    decoder.scan_once = py_make_scanner(decoder)
    return decoder.decode(text)


class _Reader:
    def __init__(self, source: str | None):
        self.source = source

    def fail(self, msg: str, obj: _Obj | None = None, key: str | None = None):
        line = obj.line_of(key) if isinstance(obj, _Obj) else None
        raise FormatError(msg, line, self.source)

    def need(self, obj, key: str, where: str = "instance"):
        if key not in obj:
            self.fail(f"{where}: missing field {key!r}", obj)
        return obj[key]

    def int_(self, obj, key: str, where: str = "instance", minimum: int | None = None) -> int:
        v = self.need(obj, key, where)
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(f"{where}: {key!r} must be an integer, got {v!r}", obj, key)
        if minimum is not None and v < minimum:
            self.fail(f"{where}: {key!r} must be >= {minimum}, got {v}", obj, key)
        return v

    def int_list(self, obj, key: str, where: str) -> list[int]:
        v = self.need(obj, key, where)
        if not isinstance(v, list) or any(isinstance(x, bool) or not isinstance(x, int) for x in v):
            self.fail(f"{where}: {key!r} must be a list of integers", obj, key)
        return v


def parse_instance(text: str, source: str | None = None) -> ProblemInstance:
    """Parse the JSON instance schema.  Raises :class:`FormatError`.

    Only the file structure is checked here; domain rules (ranges, counting
    bounds) are left to :func:`~clinroster.model.validate_instance`.
    """
    rd = _Reader(source)
    try:
        doc = _loads_with_positions(text)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, exc.lineno, source) from None
    if not isinstance(doc, dict):
        raise FormatError("top level must be a JSON object", 1, source)
    version = rd.need(doc, "format")
    if version != FORMAT_VERSION:
        rd.fail(f"unsupported format version {version!r} (expected {FORMAT_VERSION})", doc, "format")

    S = rd.int_(doc, "services", minimum=1)
    B = rd.int_(doc, "blocks", minimum=1)
    W = rd.int_(doc, "weekends", minimum=1)
    bsw = rd.int_(doc, "block_size_weeks", minimum=1) if "block_size_weeks" in doc else 2
    longs = rd.int_list(doc, "long_weekends", "instance") if "long_weekends" in doc else []
    if len(set(longs)) != len(longs):
        rd.fail("instance: duplicate entries in 'long_weekends'", doc, "long_weekends")

    adj_raw = doc.get("adjacency", "within_block_default")
    if adj_raw == "within_block_default":
        adjacency = AdjacencyMap.within_block(B, W)
    elif isinstance(adj_raw, dict):
        pairs = []
        for k, v in adj_raw.items():
            try:
                b = int(k)
            except ValueError:
                rd.fail(f"adjacency: block key {k!r} is not an integer", adj_raw, k)
            if isinstance(v, bool) or not isinstance(v, int):
                rd.fail(f"adjacency: weekend for block {k} must be an integer, got {v!r}", adj_raw, k)
            pairs.append((b, v))
        adjacency = AdjacencyMap(tuple(pairs))
    else:
        rd.fail("instance: 'adjacency' must be an object or \"within_block_default\"", doc, "adjacency")

    weights = ObjectiveWeights()
    if "weights" in doc:
        w = doc["weights"]
        if (not isinstance(w, list) or len(w) != 3
                or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in w)):
            rd.fail("instance: 'weights' must be a list of three numbers", doc, "weights")
        weights = ObjectiveWeights(*(float(x) for x in w))

    ncb = NcbMode.PER_SERVICE
    if "ncb_mode" in doc:
        try:
            ncb = NcbMode.parse(doc["ncb_mode"])
        except ValueError as exc:
            rd.fail(str(exc), doc, "ncb_mode")

    raw_cl = rd.need(doc, "clinicians")
    if not isinstance(raw_cl, list):
        rd.fail("instance: 'clinicians' must be a list", doc, "clinicians")
    clinicians = []
    for i, c in enumerate(raw_cl, start=1):
        where = f"clinician {i}"
        if not isinstance(c, dict):
            rd.fail(f"{where}: must be an object", doc, "clinicians")
        name = rd.need(c, "name", where)
        if not isinstance(name, str) or not name.strip():
            rd.fail(f"{where}: 'name' must be a non-empty string", c, "name")
        where = f"clinician {i} ({name})"
        lo = rd.int_list(c, "min", where)
        hi = rd.int_list(c, "max", where)
        for key, vals in (("min", lo), ("max", hi)):
            if len(vals) != S:
                rd.fail(f"{where}: {key!r} needs {S} per-service entries, got {len(vals)}", c, key)
        breq = rd.int_list(c, "block_requests", where) if "block_requests" in c else []
        wreq = rd.int_list(c, "weekend_requests", where) if "weekend_requests" in c else []
        for b in breq:
            if not 1 <= b <= B:
                rd.fail(f"{where}: block request {b} outside [1, {B}]", c, "block_requests")
        for w in wreq:
            if not 1 <= w <= W:
                rd.fail(f"{where}: weekend request {w} outside [1, {W}]", c, "weekend_requests")
        clinicians.append(Clinician(name, frozenset(breq), frozenset(wreq), tuple(lo), tuple(hi)))

    return ProblemInstance(
        num_services=S,
        num_blocks=B,
        num_weekends=W,
        clinicians=tuple(clinicians),
        long_weekends=frozenset(longs),
        adjacency=adjacency,
        weights=weights,
        ncb_mode=ncb,
        block_size_weeks=bsw,
    )


def instance_to_dict(inst: ProblemInstance) -> dict:
    if inst.adjacency == AdjacencyMap.within_block(inst.num_blocks, inst.num_weekends):
        adjacency: object = "within_block_default"
    else:
        adjacency = {str(b): w for b, w in inst.adjacency.pairs}
    return {
        "format": FORMAT_VERSION,
        "services": inst.num_services,
        "blocks": inst.num_blocks,
        "block_size_weeks": inst.block_size_weeks,
        "weekends": inst.num_weekends,
        "long_weekends": sorted(inst.long_weekends),
        "adjacency": adjacency,
        "weights": list(inst.weights.as_tuple()),
        "ncb_mode": inst.ncb_mode.value,
        "clinicians": [
            {
                "name": c.name,
                "min": list(c.min_blocks),
                "max": list(c.max_blocks),
                "block_requests": sorted(c.block_requests),
                "weekend_requests": sorted(c.weekend_requests),
            }
            for c in inst.clinicians
        ],
    }


def dump_instance(inst: ProblemInstance) -> str:
    return json.dumps(instance_to_dict(inst), indent=2) + "\n"


def load_instance(path: str | Path) -> ProblemInstance:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(exc.strerror or str(exc), None, str(path)) from None
    return parse_instance(text, str(path))


# ----------------------------------------------------------------- CSV


def service_headers(inst: ProblemInstance) -> list[str]:
    return [f"Service {s}" for s in inst.services]


def schedule_rows(sch: Schedule, inst: ProblemInstance) -> list[list[str]]:
    weeks = inst.num_blocks * inst.block_size_weeks
    if inst.num_weekends > weeks:
        raise ValueError(f"{inst.num_weekends} weekends do not fit in {weeks} weeks")
    names = {i: c.name for i, c in enumerate(inst.clinicians, start=1)}
    rows = [[WEEK_HEADER, *service_headers(inst), WEEKEND_HEADER]]
    for k in range(1, weeks + 1):
        b = (k - 1) // inst.block_size_weeks + 1
        cells = [names.get(sch.block_assignee.get((b, s)), "") for s in inst.services]
        wk = names.get(sch.weekend_assignee.get(k), "") if k <= inst.num_weekends else ""
        rows.append([str(k), *cells, wk])
    return rows


def format_schedule(sch: Schedule, inst: ProblemInstance) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(schedule_rows(sch, inst))
    return buf.getvalue()


def parse_schedule(text: str, inst: ProblemInstance, source: str | None = None) -> Schedule:
    """Read a schedule CSV written by :func:`format_schedule`.

    Schedules must be total: every block cell and every weekend up to W must
    name a clinician.  Raises :class:`FormatError` for empty or unknown
    clinicians, wrong shape, or a block whose weeks disagree.
    """

    def fail(msg: str, line: int | None):
        raise FormatError(msg, line, source)

    rows = list(csv.reader(io.StringIO(text)))
    want = [WEEK_HEADER, *service_headers(inst), WEEKEND_HEADER]
    if not rows:
        fail("empty schedule file", 1)
    if rows[0] != want:
        fail(f"header must be {','.join(want)}", 1)
    weeks = inst.num_blocks * inst.block_size_weeks
    if len(rows) - 1 != weeks:
        fail(f"expected {weeks} week rows, found {len(rows) - 1}", len(rows))
    ids = {c.name: i for i, c in enumerate(inst.clinicians, start=1)}
    blocks: dict[tuple[int, int], int] = {}
    weekends: dict[int, int] = {}
    first_seen: dict[tuple[int, int], str] = {}
    for k, row in enumerate(rows[1:], start=1):
        line = k + 1
        if len(row) != len(want):
            fail(f"expected {len(want)} columns, found {len(row)}", line)
        if row[0] != str(k):
            fail(f"week number should be {k}, found {row[0]!r}", line)
        b = (k - 1) // inst.block_size_weeks + 1
        for s in inst.services:
            cell = row[s]
            key = (b, s)
            if key in first_seen and first_seen[key] != cell:
                fail(f"block {b} service {s}: {cell!r} differs from {first_seen[key]!r} earlier in the block", line)
            first_seen[key] = cell
            if cell == "":
                fail(f"block {b} service {s} has no clinician", line)
            if cell not in ids:
                fail(f"unknown clinician {cell!r}", line)
            blocks[key] = ids[cell]
        wk = row[-1]
        if k > inst.num_weekends:
            if wk:
                fail(f"weekend column filled on week {k} but there are only {inst.num_weekends} weekends", line)
            continue
        if not wk:
            fail(f"weekend {k} has no clinician", line)
        if wk not in ids:
            fail(f"unknown clinician {wk!r}", line)
        weekends[k] = ids[wk]
    return Schedule(blocks, weekends)


def load_schedule(path: str | Path, inst: ProblemInstance) -> Schedule:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(exc.strerror or str(exc), None, str(path)) from None
    return parse_schedule(text, inst, str(path))
