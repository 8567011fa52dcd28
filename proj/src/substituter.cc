#include "termforge/substituter.h"

#include <algorithm>
#include <cassert>

#include "termforge/error.h"

namespace termforge {

SubstitutionPlan PlanSubstitutions(const std::vector<TermMatch>& matches,
                                   const Alignment& alignment,
                                   const TokenizedSentence& tgt) {
  SubstitutionPlan plan;
  std::vector<SubstitutionEdit> proposed;
  for (const TermMatch& m : matches) {
    std::size_t lo = tgt.size();
    std::size_t hi = 0;
    bool linked = false;
    for (const auto& [s, t] : alignment.links) {
      if (s < m.word_range.begin || s >= m.word_range.end || t >= tgt.size()) continue;
      lo = std::min(lo, t);
      hi = std::max(hi, t);
      linked = true;
    }
    if (!linked) {
      plan.warnings.push_back("no aligned target words for '" + m.surface +
                              "'; skipped");
      continue;
    }
    proposed.push_back({{lo, hi + 1}, m.entry->translation, m.entry, m.word_range});
  }

  std::stable_sort(proposed.begin(), proposed.end(),
                   [](const SubstitutionEdit& a, const SubstitutionEdit& b) {
                     if (a.src_range.size() != b.src_range.size()) {
                       return a.src_range.size() > b.src_range.size();
                     }
                     return a.src_range.begin < b.src_range.begin;
                   });
  for (SubstitutionEdit& e : proposed) {
    const auto clash = std::find_if(
        plan.edits.begin(), plan.edits.end(),
        [&](const SubstitutionEdit& k) { return k.tgt_range.Overlaps(e.tgt_range); });
    if (clash != plan.edits.end()) {
      plan.warnings.push_back("target span of '" + e.term->source_term +
                              "' overlaps '" + clash->term->source_term +
                              "'; skipped");
      continue;
    }
    plan.edits.push_back(std::move(e));
  }
  std::sort(plan.edits.begin(), plan.edits.end(),
            [](const SubstitutionEdit& a, const SubstitutionEdit& b) {
              return a.tgt_range.begin > b.tgt_range.begin;
            });
  for (std::size_t i = 1; i < plan.edits.size(); ++i) {
    assert(plan.edits[i].tgt_range.end <= plan.edits[i - 1].tgt_range.begin);
  }
  return plan;
}

AppliedText ApplyPlanWithSpans(const TokenizedSentence& tgt,
                               const SubstitutionPlan& plan) {
  for (const SubstitutionEdit& e : plan.edits) {
    if (e.tgt_range.begin >= e.tgt_range.end || e.tgt_range.end > tgt.size()) {
      throw RangeError("edit [" + std::to_string(e.tgt_range.begin) + ", " +
                       std::to_string(e.tgt_range.end) + ") outside sentence of " +
                       std::to_string(tgt.size()) + " words");
    }
  }
  for (std::size_t i = 1; i < plan.edits.size(); ++i) {
    if (plan.edits[i].tgt_range.end > plan.edits[i - 1].tgt_range.begin) {
      throw RangeError("plan edits overlap or are not in application order");
    }
  }

  AppliedText out;
  out.text = tgt.text;
  std::vector<std::size_t> starts;
  for (const SubstitutionEdit& e : plan.edits) {
    const std::size_t b = tgt.word_spans[e.tgt_range.begin].begin;
    const std::size_t end = tgt.word_spans[e.tgt_range.end - 1].end;
    out.text.replace(b, end - b, e.replacement);
    // Earlier (rightward) replacements shift by this edit's length delta.
    const long delta = static_cast<long>(e.replacement.size()) -
                       static_cast<long>(end - b);
    for (Span& s : out.replaced) {
      s.begin = static_cast<std::size_t>(static_cast<long>(s.begin) + delta);
      s.end = static_cast<std::size_t>(static_cast<long>(s.end) + delta);
    }
    out.replaced.push_back({b, b + e.replacement.size()});
  }
  std::reverse(out.replaced.begin(), out.replaced.end());
  return out;
}

std::string ApplyPlan(const TokenizedSentence& tgt, const SubstitutionPlan& plan) {
  return ApplyPlanWithSpans(tgt, plan).text;
}

std::string LanguageName(std::string_view code) {
  static const std::pair<std::string_view, std::string_view> kNames[] = {
      {"ar", "Arabic"},  {"zh", "Chinese"}, {"fr", "French"},
      {"ja", "Japanese"}, {"ru", "Russian"}, {"en", "English"},
      {"de", "German"},  {"es", "Spanish"}, {"ko", "Korean"},
  };
  for (const auto& [c, name] : kNames) {
    if (c == code) return std::string(name);
  }
  return std::string(code);
}

PromptSpec RepairPrompt(std::string_view src_text, std::string_view substituted,
                        const std::vector<TermPair>& terms,
                        std::string_view target_language) {
  return Render(TemplateId::kRepair,
                {{"source_lang", "English"},
                 {"target_lang", LanguageName(target_language)},
                 {"term_dictionary", RenderDictionaryBlock(terms)},
                 {"source_text", std::string(src_text)},
                 {"edited_translation", std::string(substituted)}});
}

}  // namespace termforge
