"""Lexico-semantic summary scoring and batch evaluation.

For every (peer, model) pair the two texts disambiguate each other, the
peer becomes one sense-seeded walk vector, and each model n-gram becomes a
walk vector seeded by its assigned senses. A gram's score blends its
clipped lexical match with the rank overlap of the two vectors:

    blended = beta * match + (1 - beta) * overlap

Corpus scores aggregate gram scores over all models and divide by the
total model gram count, so beta = 1 reduces exactly to plain recall.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .disambiguation import SenseAssignment, build_word_types, disambiguate_pair
from .graph import Dictionary
from .ppr import PprConfig, PprEngine, PprVector
from .rouge import NGram, NGramMultiset, MatchState, count_match, grams_for
from .similarity import insert_oov, sim_sem
from .text import SummaryText, tokenize

ALL_VARIANTS = ("g1", "g2", "gsu4", "r1", "r2", "rsu4")


def variant_family(variant: str) -> str:
    """Gram family ("1", "2", "su4") of a score variant."""
    if variant not in ALL_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    return variant.lstrip("gr")


def variant_is_semantic(variant: str) -> bool:
    return variant.startswith("g")


@dataclass(frozen=True)
class GrougeConfig:
    variant: str = "g1"
    beta: float = 0.5
    ppr: PprConfig = PprConfig()
    oov_enabled: bool = True

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")
        variant_family(self.variant)


@dataclass(frozen=True)
class ScoreParts:
    """Sufficient statistics of a corpus score; the blend is affine in beta."""

    lexical: float = 0.0
    semantic: float = 0.0
    total: float = 0.0

    def __add__(self, other: "ScoreParts") -> "ScoreParts":
        return ScoreParts(
            self.lexical + other.lexical,
            self.semantic + other.semantic,
            self.total + other.total,
        )

    def blend(self, beta: float) -> float:
        if self.total == 0.0:
            return 0.0
        return (beta * self.lexical + (1.0 - beta) * self.semantic) / self.total

    def lexical_recall(self) -> float:
        return self.lexical / self.total if self.total else 0.0


def _signature_from_assignment(
    assignment: SenseAssignment, engine: PprEngine, oov_enabled: bool
) -> PprVector | None:
    """Walk vector for a disambiguated text; None when there is nothing to seed."""
    senses = assignment.senses()
    if senses:
        vec = engine.ppr_for_sense_set(senses)
    else:
        vec = PprVector(engine.graph, np.empty(0, np.int64), np.empty(0, np.float64))
    if oov_enabled:
        vec = insert_oov(vec, list(assignment.oov_stems()))
    return vec if vec else None


class PairScorer:
    """Scoring context for one (model summary, peer summary) pair.

    Disambiguation runs once per pair and is shared by every n-gram and
    every variant scored against it.
    """

    def __init__(
        self,
        model_text: SummaryText,
        peer_text: SummaryText,
        engine: PprEngine,
        dictionary: Dictionary,
        oov_enabled: bool = True,
        semantic: bool = True,
    ):
        self.model_text = model_text
        self.peer_text = peer_text
        self.engine = engine
        self.oov_enabled = oov_enabled
        self.semantic = semantic
        self.model_assignment: SenseAssignment | None = None
        self.peer_assignment: SenseAssignment | None = None
        self.peer_signature: PprVector | None = None
        self._sense_map: dict[str, object] = {}
        self._sig_cache: dict[tuple, PprVector | None] = {}
        if semantic and model_text.token_count and peer_text.token_count:
            model_wts = build_word_types(model_text, dictionary)
            peer_wts = build_word_types(peer_text, dictionary)
            self.model_assignment, self.peer_assignment = disambiguate_pair(
                model_wts, peer_wts, engine
            )
            self._sense_map = {
                e.word.stem: e.sense for e in self.model_assignment
            }
            self.peer_signature = _signature_from_assignment(
                self.peer_assignment, engine, oov_enabled
            )

    def _gram_key(self, gram: NGram) -> tuple:
        terms = tuple(dict.fromkeys(gram.content_terms()))
        seeds = []
        oov = []
        for term in terms:
            sense = self._sense_map.get(term)
            if sense is None:
                oov.append(term)
            else:
                seeds.append(sense)
        return tuple(dict.fromkeys(seeds)), tuple(oov)

    def gram_signature(self, gram: NGram) -> PprVector | None:
        key = self._gram_key(gram)
        if key in self._sig_cache:
            return self._sig_cache[key]
        seeds, oov = key
        if seeds:
            vec: PprVector | None = self.engine.ppr_for_sense_set(seeds)
        else:
            vec = PprVector(
                self.engine.graph, np.empty(0, np.int64), np.empty(0, np.float64)
            )
        if self.oov_enabled:
            vec = insert_oov(vec, list(oov))
        vec = vec if vec else None
        self._sig_cache[key] = vec
        return vec

    def gram_overlap(self, gram: NGram) -> float:
        """Semantic term of the blend for one gram against the peer text."""
        if not self.semantic or self.peer_signature is None:
            return 0.0
        sig = self.gram_signature(gram)
        if sig is None:
            return 0.0
        return sim_sem(sig, self.peer_signature)

    def parts(self, family: str) -> ScoreParts:
        model_grams = grams_for(self.model_text, family)
        peer_grams = grams_for(self.peer_text, family)
        if self.semantic:
            seed_sets = [
                seeds
                for seeds, _ in {self._gram_key(g): None for g, _ in model_grams.items()}
                if seeds
            ]
            self.engine.prime_seed_sets(seed_sets)
        lexical = 0.0
        semantic = 0.0
        for gram, mc in model_grams.items():
            lexical += min(mc, peer_grams.count(gram))
            if self.semantic:
                semantic += mc * self.gram_overlap(gram)
        return ScoreParts(lexical, semantic, float(model_grams.total))

    def debug_lines(self) -> list[str]:
        lines = []
        for label, assignment in (
            ("model", self.model_assignment),
            ("peer", self.peer_assignment),
        ):
            if assignment is None:
                continue
            lines.append(f"# side={label}")
            for entry in assignment:
                sense = entry.sense.canonical if entry.sense else "OOV"
                lines.append(f"{entry.word.stem}\t{sense}\t{entry.support:.6f}")
        return lines


def peer_signature(
    peer: SummaryText,
    model: SummaryText,
    engine: PprEngine,
    dictionary: Dictionary,
    oov_enabled: bool = True,
) -> PprVector | None:
    """Walk vector of the peer text disambiguated against one model."""
    pair = PairScorer(model, peer, engine, dictionary, oov_enabled=oov_enabled)
    return pair.peer_signature


def gram_signature(
    gram: NGram, model_assignment: SenseAssignment, engine: PprEngine,
    oov_enabled: bool = True,
) -> PprVector | None:
    """Walk vector of one model gram under an existing sense assignment."""
    seeds = []
    oov = []
    sense_map = {e.word.stem: e.sense for e in model_assignment}
    for term in dict.fromkeys(gram.content_terms()):
        sense = sense_map.get(term)
        if sense is None:
            oov.append(term)
        else:
            seeds.append(sense)
    if seeds:
        vec: PprVector | None = engine.ppr_for_sense_set(tuple(dict.fromkeys(seeds)))
    else:
        vec = PprVector(engine.graph, np.empty(0, np.int64), np.empty(0, np.float64))
    if oov_enabled:
        vec = insert_oov(vec, oov)
    return vec if vec else None


def sim_ls(
    gram: NGram,
    pair: PairScorer,
    peer_grams: NGramMultiset,
    state: MatchState,
    beta: float,
) -> float:
    """Blend of one gram occurrence's clipped match and semantic overlap."""
    matched = count_match(gram, peer_grams, state)
    return beta * matched + (1.0 - beta) * pair.gram_overlap(gram)


def grouge_parts(
    peer: SummaryText,
    models: list[SummaryText],
    cfg: GrougeConfig,
    engine: PprEngine,
    dictionary: Dictionary,
) -> ScoreParts:
    if not models:
        raise ValueError("at least one model summary is required")
    family = variant_family(cfg.variant)
    semantic = variant_is_semantic(cfg.variant)
    parts = ScoreParts()
    for model in models:
        pair = PairScorer(
            model, peer, engine, dictionary,
            oov_enabled=cfg.oov_enabled, semantic=semantic,
        )
        parts = parts + pair.parts(family)
    return parts


def grouge_score(
    peer: SummaryText,
    models: list[SummaryText],
    cfg: GrougeConfig,
    engine: PprEngine,
    dictionary: Dictionary,
) -> float:
    """Corpus-level blended score of one peer against its models."""
    beta = cfg.beta if variant_is_semantic(cfg.variant) else 1.0
    return grouge_parts(peer, models, cfg, engine, dictionary).blend(beta)


# ---------------------------------------------------------------------------
# batch evaluation over a directory corpus
# ---------------------------------------------------------------------------


@dataclass
class ScoreReport:
    variants: tuple[str, ...]
    rows: dict[tuple[str, str, str], float] = field(default_factory=dict)
    parts: dict[tuple[str, str, str], ScoreParts] = field(default_factory=dict)
    flagged: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    debug_lines: list[str] = field(default_factory=list)

    def score(self, topic: str, system: str, variant: str) -> float:
        return self.rows[(topic, system, variant)]

    def systems(self) -> list[str]:
        return sorted({key[1] for key in self.rows})

    def topics(self) -> list[str]:
        return sorted({key[0] for key in self.rows})

    def system_means(self, variant: str) -> dict[str, float]:
        """Per-system score averaged over the full topic set."""
        topics = self.topics()
        out = {}
        for system in self.systems():
            values = [self.rows[(t, system, variant)] for t in topics]
            out[system] = sum(values) / len(values) if values else 0.0
        return out

    def to_csv_bytes(self) -> bytes:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["topic", "system", "variant", "score"])
        for (topic, system, variant) in sorted(self.rows):
            writer.writerow([topic, system, variant, f"{self.rows[(topic, system, variant)]:.12g}"])
        return buf.getvalue().encode("utf-8")

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_csv_bytes())


def _scan_corpus_dir(directory: Path) -> tuple[dict[tuple[str, str], Path], list[str]]:
    """Map (topic, id) -> file for a <topic>.<id>.txt directory layout."""
    out: dict[tuple[str, str], Path] = {}
    errors: list[str] = []
    for path in sorted(directory.iterdir()):
        if not path.is_file() or path.suffix != ".txt":
            continue
        fields = path.name.split(".")
        if len(fields) < 3:
            errors.append(f"{path}: expected <topic>.<id>.txt, skipped")
            continue
        out[(fields[0], ".".join(fields[1:-1]))] = path
    return out, errors


def score_batch(
    peers_dir: str | Path,
    models_dir: str | Path,
    cfg: GrougeConfig,
    engine: PprEngine,
    dictionary: Dictionary,
    variants: tuple[str, ...] = ALL_VARIANTS,
    jobs: int = 1,
    stemming: bool = True,
    remove_stopwords: bool = False,
    collect_debug: bool = False,
    provenance: dict | None = None,
) -> ScoreReport:
    """Score every (topic, system) peer against its topic's model summaries.

    Missing peer summaries score 0 and are flagged so every system covers
    the same topic set; unreadable files become error entries and the rest
    of the batch continues.
    """
    for variant in variants:
        variant_family(variant)
    report = ScoreReport(variants=tuple(variants), provenance=provenance or {})

    peers, peer_scan_errors = _scan_corpus_dir(Path(peers_dir))
    models, model_scan_errors = _scan_corpus_dir(Path(models_dir))
    report.errors.extend(peer_scan_errors)
    report.errors.extend(model_scan_errors)

    texts: dict[Path, SummaryText] = {}

    def read_text(path: Path) -> SummaryText:
        if path not in texts:
            texts[path] = tokenize(
                path.read_text("utf-8"),
                stemming=stemming,
                remove_stopwords=remove_stopwords,
            )
        return texts[path]

    model_topics = sorted({topic for topic, _ in models})
    peer_topics = {topic for topic, _ in peers}
    for topic in sorted(peer_topics - set(model_topics)):
        report.flagged.append(f"topic {topic}: no model summaries, skipped")

    topic_models: dict[str, list[SummaryText]] = {}
    for topic in model_topics:
        loaded = []
        for (t, model_id), path in sorted(models.items()):
            if t != topic:
                continue
            try:
                loaded.append(read_text(path))
            except (OSError, UnicodeDecodeError) as exc:
                report.errors.append(f"{path}: {exc}")
        if loaded:
            topic_models[topic] = loaded
        else:
            report.flagged.append(f"topic {topic}: all model summaries unreadable, skipped")

    systems = sorted({system for _, system in peers})
    tasks = [(topic, system) for topic in sorted(topic_models) for system in systems]

    def run_task(task: tuple[str, str]) -> tuple[tuple[str, str], dict, dict, list, list, list]:
        topic, system = task
        scores: dict[str, float] = {}
        parts_out: dict[str, ScoreParts] = {}
        flagged: list[str] = []
        errors: list[str] = []
        debug: list[str] = []
        peer_path = peers.get((topic, system))
        peer_text: SummaryText | None = None
        if peer_path is None:
            flagged.append(f"{topic}.{system}: peer summary missing, scored 0")
        else:
            try:
                peer_text = read_text(peer_path)
            except (OSError, UnicodeDecodeError) as exc:
                errors.append(f"{peer_path}: {exc}")
        if peer_text is None:
            for variant in variants:
                scores[variant] = 0.0
                parts_out[variant] = ScoreParts()
            return task, scores, parts_out, flagged, errors, debug

        families = sorted({variant_family(v) for v in variants})
        need_semantics = any(variant_is_semantic(v) for v in variants)
        family_parts: dict[str, ScoreParts] = {f: ScoreParts() for f in families}
        lex_parts: dict[str, ScoreParts] = {f: ScoreParts() for f in families}
        for model_text in topic_models[topic]:
            pair = PairScorer(
                model_text, peer_text, engine, dictionary,
                oov_enabled=cfg.oov_enabled, semantic=need_semantics,
            )
            if collect_debug:
                debug.append(f"# topic={topic} system={system}")
                debug.extend(pair.debug_lines())
            for family in families:
                p = pair.parts(family)
                family_parts[family] = family_parts[family] + p
                lex_parts[family] = lex_parts[family] + ScoreParts(p.lexical, 0.0, p.total)
        for variant in variants:
            family = variant_family(variant)
            if variant_is_semantic(variant):
                scores[variant] = family_parts[family].blend(cfg.beta)
                parts_out[variant] = family_parts[family]
            else:
                scores[variant] = lex_parts[family].lexical_recall()
                parts_out[variant] = lex_parts[family]
        return task, scores, parts_out, flagged, errors, debug

    if jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_task, tasks))
    else:
        results = [run_task(t) for t in tasks]

    for (topic, system), scores, parts_out, flagged, errors, debug in results:
        for variant, value in scores.items():
            report.rows[(topic, system, variant)] = value
            report.parts[(topic, system, variant)] = parts_out[variant]
        report.flagged.extend(flagged)
        report.errors.extend(errors)
        report.debug_lines.extend(debug)
    return report
