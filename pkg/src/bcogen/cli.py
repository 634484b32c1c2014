"""Command-line entry point: interactive menu-driven sessions plus
non-interactive batch flags so every interactive path is scriptable.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .corpus import ChunkStrategy, RepoFilter, fetch_repo
from .embedding import EmbeddingCache
from .errors import BcogenError
from .paramsearch import (
    DEFAULT_EMBEDDING_MODEL,
    DEFAULT_LLM_MODEL,
    ParameterSet,
    RepoSpec,
    SearchSpace,
    grid,
    random_search,
    run_trials,
)
from .pipeline import Pipeline
from .registry import DOMAIN_NAMES
from .runstore import RunStore

DOCS_FILE = "docs/parameters.md"

EMBEDDING_MODEL_CHOICES = [DEFAULT_EMBEDDING_MODEL, "text-embedding-3-large"]
LLM_MODEL_CHOICES = [DEFAULT_LLM_MODEL, "gpt-4o"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bcogen",
        description=(
            "Generate schema-valid BioCompute Object domains from a paper PDF "
            "and optional code repository using retrieval-augmented generation."
        ),
    )
    parser.add_argument("--pdf", help="path to the paper PDF")
    parser.add_argument("--repo", help="repository URL or local path to index alongside the paper")
    parser.add_argument("--branch", default="main", help="repository branch to index")
    parser.add_argument("--include-ext", action="append", default=[], metavar="EXT",
                        help="admit only files with this extension (repeatable)")
    parser.add_argument("--exclude-ext", action="append", default=[], metavar="EXT",
                        help="skip files with this extension (repeatable)")
    parser.add_argument("--include-dir", action="append", default=[], metavar="DIR",
                        help="admit only files under this directory (repeatable)")
    parser.add_argument("--exclude-dir", action="append", default=[], metavar="DIR",
                        help="skip files under this directory (repeatable)")
    parser.add_argument("--domain", help="generate a single domain non-interactively")
    parser.add_argument("--domains", help="comma-separated list of domains to generate")
    parser.add_argument("--search", metavar="FILE",
                        help="JSON search-space file; runs a parameter sweep")
    parser.add_argument("--random", type=int, metavar="N",
                        help="sample N random parameter sets from the search space")
    parser.add_argument("--seed", type=int, default=0, help="seed for --random")
    parser.add_argument("--output", default="output", help="run store root directory")
    parser.add_argument("--cache", help="embedding cache directory (default: <output>/.embedding_cache)")
    parser.add_argument("--chunk-strategy", choices=["fixed_window", "paragraph"],
                        default="fixed_window")
    parser.add_argument("--window", type=int, default=1000, help="chunk window in characters")
    parser.add_argument("--overlap", type=int, default=100, help="chunk overlap in characters")
    parser.add_argument("--embedding-model", default=DEFAULT_EMBEDDING_MODEL)
    parser.add_argument("--k-first", type=int, default=20, help="first-pass retrieval top-k")
    parser.add_argument("--k-final", type=int, default=5, help="final top-k after re-ranking")
    parser.add_argument("--llm-model", default=DEFAULT_LLM_MODEL)
    parser.add_argument("--mock-providers", action="store_true",
                        help="use deterministic offline providers (no network)")
    parser.add_argument("--metrics", action="store_true",
                        help="compute judge metrics for each generated domain")
    parser.add_argument("--serve", action="store_true", help="start the evaluation service")
    parser.add_argument("--paper", help="paper id to serve (with --serve)")
    parser.add_argument("--port", type=int, default=8731, help="evaluation service port")
    return parser


def _repo_filters(args) -> tuple[RepoFilter, ...]:
    filters = []
    for ext in args.include_ext:
        filters.append(RepoFilter("extension", ext, "include"))
    for ext in args.exclude_ext:
        filters.append(RepoFilter("extension", ext, "exclude"))
    for d in args.include_dir:
        filters.append(RepoFilter("directory", d, "include"))
    for d in args.exclude_dir:
        filters.append(RepoFilter("directory", d, "exclude"))
    return tuple(filters)


def _params_from_args(args) -> ParameterSet:
    repo = None
    if args.repo:
        repo = RepoSpec(locator=args.repo, branch=args.branch, filters=_repo_filters(args))
    return ParameterSet(
        loader="pdf",
        chunk_strategy=ChunkStrategy(args.chunk_strategy, args.window, args.overlap),
        embedding_model=args.embedding_model,
        k_first=args.k_first,
        k_final=args.k_final,
        llm_model=args.llm_model,
        repo=repo,
    )


def _make_pipeline(args, pdf_path: str, out) -> Pipeline:
    cache_dir = args.cache if args.cache else str(Path(args.output) / ".embedding_cache")
    return Pipeline(
        pdf_path,
        store=RunStore(args.output),
        cache=EmbeddingCache(cache_dir),
        mock=args.mock_providers,
        compute_metrics=args.metrics,
        progress=lambda msg: print(msg, file=out),
    )


def _validate_domains(parser: argparse.ArgumentParser, names: list[str]) -> list[str]:
    for name in names:
        if name not in DOMAIN_NAMES:
            parser.error(
                f"unknown domain {name!r}; valid domains: {', '.join(DOMAIN_NAMES)}"
            )
    return names


def batch_mode(args, parser: argparse.ArgumentParser, out=None) -> int:
    """Non-interactive execution of a single run or a sweep, with one
    machine-readable summary line per run on stdout."""
    out = out if out is not None else sys.stdout
    if not args.pdf:
        parser.error("--pdf is required in batch mode")

    if args.domain and args.domains:
        parser.error("--domain and --domains conflict; pass one of them")
    names = []
    if args.domain:
        names = [args.domain]
    elif args.domains:
        names = [n.strip() for n in args.domains.split(",") if n.strip()]
    if not names and not args.search:
        parser.error("batch mode needs --domain, --domains, or --search")
    if args.search and not names:
        names = list(DOMAIN_NAMES)
    _validate_domains(parser, names)

    pipeline = _make_pipeline(args, args.pdf, out)

    if args.search:
        space = SearchSpace.from_json_file(args.search)
        if args.random:
            sets = random_search(space, args.random, args.seed)
        else:
            sets = grid(space)
        print(f"sweep: {len(sets)} parameter set(s) x {len(names)} domain(s)", file=out)
        records = run_trials(sets, names, pipeline)
    else:
        params = _params_from_args(args)
        records = []
        for name in names:
            records.append(pipeline.generate(name, params))

    for record in records:
        print(
            f"RUN {record.run_id} domain={record.domain} valid={record.valid} "
            f"attempts={record.attempts} params={record.parameter_set.digest()}",
            file=out,
        )
    return 0


# --- interactive session ----------------------------------------------------


def _ask(stdin, out, prompt: str, default: str = "") -> str:
    out.write(prompt)
    out.flush()
    line = stdin.readline()
    if line == "":
        raise EOFError
    line = line.strip()
    return line if line else default


def _menu(stdin, out, title: str, doc_anchor: str, options: list[str],
          default_index: int | None = 0) -> int:
    """Numbered menu; bare Enter picks the default when one exists."""
    while True:
        out.write(f"\n{title}  (docs: {DOCS_FILE}#{doc_anchor})\n")
        for i, option in enumerate(options, start=1):
            marker = "  [default]" if default_index is not None and i - 1 == default_index else ""
            out.write(f"  {i}) {option}{marker}\n")
        hint = f"[{default_index + 1}]" if default_index is not None else ""
        answer = _ask(stdin, out, f"choice {hint}: ")
        if not answer and default_index is not None:
            return default_index
        if answer.isdigit() and 1 <= int(answer) <= len(options):
            return int(answer) - 1
        out.write(f"invalid choice: {answer!r}\n")


def _ask_int(stdin, out, prompt: str, default: int) -> int:
    while True:
        answer = _ask(stdin, out, f"{prompt} [{default}]: ")
        if not answer:
            return default
        try:
            return int(answer)
        except ValueError:
            out.write(f"not a number: {answer!r}\n")


def _configure_parameters(stdin, out) -> ParameterSet:
    _menu(stdin, out, "Data loader", "loader", ["pdf (extract page text in page order)"])
    strategy_choice = _menu(
        stdin, out, "Chunking strategy", "chunking",
        [
            "fixed_window (window=1000 chars, overlap=100)",
            "paragraph (merge paragraphs up to 1000 chars)",
            "fixed_window with custom window/overlap",
        ],
    )
    if strategy_choice == 0:
        strategy = ChunkStrategy("fixed_window", 1000, 100)
    elif strategy_choice == 1:
        strategy = ChunkStrategy("paragraph", 1000, 0)
    else:
        window = _ask_int(stdin, out, "window (chars)", 1000)
        overlap = _ask_int(stdin, out, "overlap (chars)", 100)
        strategy = ChunkStrategy("fixed_window", window, overlap)

    embedding_model = EMBEDDING_MODEL_CHOICES[
        _menu(stdin, out, "Embedding model", "embedding-model", EMBEDDING_MODEL_CHOICES)
    ]
    k_first = _ask_int(stdin, out, "first-pass top-k (k_first)", 20)
    k_final = _ask_int(stdin, out, "final top-k after re-ranking (k_final)", 5)
    llm_model = LLM_MODEL_CHOICES[
        _menu(stdin, out, "LLM model", "llm-model", LLM_MODEL_CHOICES)
    ]
    return ParameterSet(
        loader="pdf",
        chunk_strategy=strategy,
        embedding_model=embedding_model,
        k_first=k_first,
        k_final=k_final,
        llm_model=llm_model,
        repo=None,
    )


def _parse_filter(text: str) -> RepoFilter | None:
    parts = text.split()
    if len(parts) != 3:
        return None
    mode, kind, pattern = parts
    if mode not in ("include", "exclude"):
        return None
    kind_map = {"ext": "extension", "extension": "extension", "dir": "directory",
                "directory": "directory"}
    if kind not in kind_map:
        return None
    return RepoFilter(kind_map[kind], pattern, mode)


def _configure_repo(stdin, out) -> RepoSpec | None:
    """Optional supplementary repository: URL, then branch, then filters.
    An unreachable repository re-prompts instead of ending the session."""
    while True:
        url = _ask(
            stdin, out,
            f"\nGitHub repository URL or local path to index alongside the paper "
            f"(Enter to skip)  (docs: {DOCS_FILE}#repository): ",
        )
        if not url:
            return None
        branch = _ask(stdin, out, "branch [main]: ", default="main")
        filters: list[RepoFilter] = []
        while True:
            raw = _ask(
                stdin, out,
                "filter as '<include|exclude> <ext|dir> <pattern>' (Enter to finish): ",
            )
            if not raw:
                break
            parsed = _parse_filter(raw)
            if parsed is None:
                out.write(f"cannot parse filter: {raw!r}\n")
                continue
            filters.append(parsed)
        try:
            docs = fetch_repo(url, branch, filters)
        except BcogenError as exc:
            out.write(f"repository error: {exc}\n")
            continue
        out.write(f"repository reachable; {len(docs)} file(s) admitted\n")
        return RepoSpec(locator=url, branch=branch, filters=tuple(filters))


def interactive_session(args, stdin=None, out=None) -> int:
    """Menu sequence: parameter configuration (each with a default), optional
    repository with branch and filters, ingest and index build, then a
    domain-selection loop generating one domain per choice until exit."""
    stdin = stdin if stdin is not None else sys.stdin
    out = out if out is not None else sys.stdout
    out.write("bcogen interactive session\n")

    pdf = args.pdf
    while True:
        if not pdf:
            try:
                pdf = _ask(stdin, out, "\npath to paper PDF: ")
            except EOFError:
                return 1
        if pdf and Path(pdf).is_file():
            break
        out.write(f"not a readable file: {pdf!r}\n")
        pdf = None

    try:
        params = _configure_parameters(stdin, out)
        repo = _configure_repo(stdin, out)
        if repo is not None:
            params = dataclasses.replace(params, repo=repo)
    except EOFError:
        out.write("\nsession ended before configuration finished\n")
        return 1

    pipeline = _make_pipeline(args, pdf, out)
    try:
        out.write("\nbuilding the retrieval index...\n")
        pipeline.prepare(params)
    except BcogenError as exc:
        out.write(f"setup failed: {exc}\n")
        return 1

    domain_options = list(DOMAIN_NAMES) + ["exit"]
    while True:
        try:
            choice = _menu(
                stdin, out, "Generate which BCO domain?", "domains",
                domain_options, default_index=None,
            )
        except EOFError:
            return 0
        if domain_options[choice] == "exit":
            out.write("done.\n")
            return 0
        domain = domain_options[choice]
        try:
            record = pipeline.generate(domain, params)
        except BcogenError as exc:
            out.write(f"generation failed: {exc}\n")
            continue
        status = "valid" if record.valid else f"INVALID ({len(record.validation)} violation(s))"
        out.write(f"generated {record.run_id}: {status}, attempts={record.attempts}\n")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.serve:
        from .evalservice import serve

        serve(args.output, args.paper, "127.0.0.1", args.port)
        return 0

    if args.domain or args.domains or args.search:
        return batch_mode(args, parser)
    return interactive_session(args)


if __name__ == "__main__":
    raise SystemExit(main())
