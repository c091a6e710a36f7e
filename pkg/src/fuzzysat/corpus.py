"""Corpus replay and the attribution report."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

from fuzzysat import expr as E
from fuzzysat.mutate import MutationConfig
from fuzzysat.smtlib import ParsedQuery, ParseError, parse_file
from fuzzysat.solver import ATTRIBUTIONS, OPT_SAT, SAT, STATUSES, Query, Session

ERROR = "error"
REPORT_SCHEMA = 1


@dataclass
class LoadedQuery:
    parsed: ParsedQuery
    seed: bytes
    seed_source: str          # "file:<name>", "option:<name>" or "zero-filled"

    def query(self, opt: Optional[bool] = None) -> Query:
        p = self.parsed
        if p.branch is None:
            raise ParseError("query has no branch assertion", path=p.path)
        return Query(p.branch, p.pi, self.seed, p.opt if opt is None else opt)


def load_query(path: Union[str, Path], seed_path: Optional[Union[str, Path]] = None) -> LoadedQuery:
    """Parse ``path`` and resolve its seed.

    Precedence: explicit ``seed_path``, the ``:fuzzysat-seed`` option
    (relative to the query file), a sibling ``<stem>.seed``, then zeros of
    minimal covering length.
    """
    path = Path(path)
    parsed = parse_file(path)
    need = parsed.max_input + 1
    if seed_path is not None:
        seed, src = Path(seed_path).read_bytes(), f"file:{Path(seed_path).name}"
    elif parsed.seed_path is not None:
        sp = path.parent / parsed.seed_path
        try:
            seed = sp.read_bytes()
        except OSError as exc:
            raise ParseError(f"cannot read seed file {parsed.seed_path}: {exc.strerror}",
                             path=str(path)) from None
        src = f"option:{parsed.seed_path}"
    elif path.with_suffix(".seed").exists():
        seed, src = path.with_suffix(".seed").read_bytes(), f"file:{path.with_suffix('.seed').name}"
    else:
        seed, src = bytes(need), "zero-filled"
    if len(seed) < need:
        seed = seed + bytes(need - len(seed))
    return LoadedQuery(parsed, seed, src)


@dataclass
class QueryRecord:
    file: str
    status: str
    attribution: Optional[str] = None
    primitive: str = "solve"
    seed: str = ""
    testcase: Optional[str] = None
    value: Optional[List[int]] = None
    reason: str = ""
    candidates: int = 0
    pi_evals: int = 0
    seed_satisfies_pi: Optional[bool] = None
    time: float = 0.0

    def body(self) -> Dict[str, object]:
        d = dataclasses.asdict(self)
        del d["time"]
        return d


@dataclass
class CorpusReport:
    config: Dict[str, object]
    rng_seed: int
    digest: str
    records: List[QueryRecord] = field(default_factory=list)

    @property
    def by_status(self) -> Dict[str, int]:
        out = {s: 0 for s in STATUSES + (ERROR,)}
        for r in self.records:
            if r.primitive == "solve" or r.status == ERROR:
                out[r.status] = out.get(r.status, 0) + 1
        return out

    @property
    def by_attribution(self) -> Dict[str, int]:
        out = {a: 0 for a in ATTRIBUTIONS}
        for r in self.records:
            if r.primitive == "solve" and r.status in (SAT, OPT_SAT):
                out[r.attribution] += 1
        return out

    @property
    def by_primitive(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for r in self.records:
            out[r.primitive] = out.get(r.primitive, 0) + 1
        return out

    def body_dict(self) -> Dict[str, object]:
        return {
            "schema": REPORT_SCHEMA,
            "header": {"config": self.config, "rng_seed": self.rng_seed,
                       "corpus_sha256": self.digest, "files": len(self.records)},
            "records": [r.body() for r in self.records],
            "aggregate": {"status": self.by_status, "attribution": self.by_attribution,
                          "primitive": self.by_primitive},
        }

    def body(self) -> str:
        """Deterministic part of the report (no timings)."""
        return json.dumps(self.body_dict(), indent=1, sort_keys=True)

    def render(self) -> str:
        d = self.body_dict()
        times = {r.file: round(r.time, 6) for r in self.records}
        d["timing"] = {"total": round(sum(times.values()), 6), "per_file": times}
        return json.dumps(d, indent=1, sort_keys=True)

    def summary(self) -> str:
        st = self.by_status
        at = self.by_attribution
        lines = [f"files: {len(self.records)}",
                 "status: " + " ".join(f"{k}={v}" for k, v in st.items()),
                 "attribution: " + " ".join(f"{k}={v}" for k, v in at.items())]
        return "\n".join(lines)


def _digest(files: List[Path], root: Path) -> str:
    h = hashlib.sha256()
    for f in files:
        h.update(str(f.relative_to(root)).encode())
        h.update(b"\0")
        h.update(f.read_bytes())
        h.update(b"\0")
    return h.hexdigest()


def run_file(path: Path, cfg: MutationConfig, name: Optional[str] = None) -> QueryRecord:
    """Solve one query file in a fresh session; errors become records."""
    name = name or path.name
    t0 = time.perf_counter()
    try:
        lq = load_query(path)
    except (ParseError, OSError) as exc:
        return QueryRecord(name, ERROR, reason=str(exc), time=time.perf_counter() - t0)
    p = lq.parsed
    sess = Session(cfg)
    rec = QueryRecord(name, "", primitive=p.primitive, seed=lq.seed_source)
    if p.primitive == "solve":
        try:
            q = lq.query()
        except ParseError as exc:
            return QueryRecord(name, ERROR, reason=str(exc), time=time.perf_counter() - t0)
        r = sess.solve(q)
        rec.status, rec.attribution, rec.reason = r.status, r.attribution, r.reason
        rec.candidates = int(r.stats.get("candidates", 0))
        rec.pi_evals = int(r.stats.get("pi_evals", 0))
        rec.seed_satisfies_pi = r.seed_satisfies_pi
        if r.is_sat:
            rec.testcase = r.testcase(q.seed).hex()
    else:
        fn = {"min": sess.solve_min, "max": sess.solve_max, "all": sess.solve_all}[p.primitive]
        out = fn(p.target, p.pi, lq.seed)
        if p.primitive == "all":
            rec.value = [v for _, v in out]
            found = bool(out)
        else:
            found = out is not None
            if found:
                rec.value = [out[1]]
                rec.testcase = E.apply(out[0], lq.seed).hex()
        rec.status = "found" if found else "none"
        rec.seed_satisfies_pi = all(E.evaluate(x, lq.seed) for x in p.pi)
    rec.time = time.perf_counter() - t0
    return rec


def run_corpus(directory: Union[str, Path], cfg: Optional[MutationConfig] = None,
               pattern: str = "*.smt2") -> CorpusReport:
    """Solve every query file under ``directory`` in file-name order."""
    cfg = cfg or MutationConfig()
    root = Path(directory)
    if not root.is_dir():
        raise NotADirectoryError(str(root))
    files = sorted(root.rglob(pattern), key=lambda f: str(f.relative_to(root)))
    seeds = sorted(root.rglob("*.seed"), key=lambda f: str(f.relative_to(root)))
    report = CorpusReport(config=_config_dict(cfg), rng_seed=cfg.rng_seed,
                          digest=_digest(sorted(files + seeds), root))
    for f in files:
        report.records.append(run_file(f, cfg, str(f.relative_to(root))))
    return report


def _config_dict(cfg: MutationConfig) -> Dict[str, object]:
    d = dataclasses.asdict(cfg)
    return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}
