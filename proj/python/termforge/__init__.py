"""Glossary-driven terminology enforcement for machine translation."""

from termforge._core import (
    Glossary,
    TermforgeError,
    align,
    beam_search,
    bleu,
    build_refine_prompt,
    build_select_prompt,
    chrf,
    chunk_text,
    dump_violations,
    emit_report,
    evaluate,
    filter_candidates,
    find_matches,
    fleiss_kappa,
    glossary_stats,
    greedy_decode,
    majority_vote,
    merge_glossaries,
    one_sample_t,
    paired_t,
    parse_dictionary_block,
    parse_glossary,
    parse_select_response,
    parse_term_list,
    rarefaction,
    student_t_cdf,
    substitute,
    ter,
    tokenize,
)

__all__ = [
    "Glossary",
    "TermforgeError",
    "align",
    "beam_search",
    "bleu",
    "build_refine_prompt",
    "build_select_prompt",
    "chrf",
    "chunk_text",
    "dump_violations",
    "emit_report",
    "evaluate",
    "filter_candidates",
    "find_matches",
    "fleiss_kappa",
    "glossary_stats",
    "greedy_decode",
    "majority_vote",
    "merge_glossaries",
    "one_sample_t",
    "paired_t",
    "parse_dictionary_block",
    "parse_glossary",
    "parse_select_response",
    "parse_term_list",
    "rarefaction",
    "student_t_cdf",
    "substitute",
    "ter",
    "tokenize",
]
