#include "termforge/refiner.h"

#include <map>

#include "termforge/error.h"
#include "termforge/substituter.h"
#include "termforge/text.h"

namespace termforge {

void CandidateSet::Validate() const {
  if (candidates.size() != kCandidateCount) {
    throw ValidationError("candidate set for '" + term + "' has " +
                          std::to_string(candidates.size()) + " entries, expected 11");
  }
  for (const std::string& c : candidates) {
    if (text::Trim(c).empty()) {
      throw ValidationError("candidate set for '" + term + "' has a blank entry");
    }
  }
}

std::string VoteKey(std::string_view candidate) {
  return text::CaseFold(text::Trim(text::Nfc(candidate)));
}

std::optional<std::string> MajorityVote(const CandidateSet& cs) {
  cs.Validate();
  std::map<std::string, std::size_t> counts;
  std::map<std::string, std::string> first_spelling;
  for (const std::string& c : cs.candidates) {
    const std::string key = VoteKey(c);
    ++counts[key];
    first_spelling.emplace(key, text::Trim(text::Nfc(c)));
  }
  for (const auto& [key, n] : counts) {
    if (n > kMajorityThreshold) return first_spelling.at(key);
  }
  return std::nullopt;
}

PromptSpec BuildRefinePrompt(std::string_view src_text,
                             std::string_view initial_translation,
                             const std::vector<TermPair>& terms,
                             std::string_view source_lang,
                             std::string_view target_lang) {
  return Render(TemplateId::kRefine,
                {{"source_lang", LanguageName(source_lang)},
                 {"target_lang", LanguageName(target_lang)},
                 {"term_dictionary", RenderDictionaryBlock(terms)},
                 {"source_text", std::string(src_text)},
                 {"initial_translation", std::string(initial_translation)}});
}

PromptSpec BuildSelectPrompt(const CandidateSet& cs,
                             const std::vector<std::string>& contexts) {
  cs.Validate();
  std::string context_block;
  for (const std::string& c : contexts) context_block += "- " + text::NormalizeTerm(c) + "\n";
  if (contexts.empty()) context_block = "- (no context available)\n";
  std::string candidate_block;
  for (std::size_t i = 0; i < cs.candidates.size(); ++i) {
    candidate_block += std::to_string(i + 1) + ". " +
                       text::NormalizeTerm(cs.candidates[i]) + "\n";
  }
  return Render(TemplateId::kSelectBest,
                {{"term", cs.term},
                 {"target_lang", LanguageName(cs.language)},
                 {"contexts", context_block},
                 {"candidates", candidate_block}});
}

std::size_t ParseSelectResponse(std::string_view response, std::size_t n) {
  const std::string trimmed = text::Trim(response);
  if (trimmed.empty() || trimmed.size() > 3) {
    throw InvalidLabelError("expected a bare label, got '" + std::string(response) + "'");
  }
  std::size_t label = 0;
  for (char c : trimmed) {
    if (c < '0' || c > '9') {
      throw InvalidLabelError("expected a bare label, got '" + std::string(response) + "'");
    }
    label = label * 10 + static_cast<std::size_t>(c - '0');
  }
  if (label < 1 || label > n) {
    throw InvalidLabelError("label " + trimmed + " outside 1.." + std::to_string(n));
  }
  return label - 1;
}

template <typename T>
T ParseOrReprompt(CompletionClient& client, const PromptSpec& prompt,
                  std::string_view first_response,
                  const std::function<T(std::string_view)>& parse,
                  std::string_view reminder) {
  try {
    return parse(first_response);
  } catch (const Error&) {
  }
  PromptSpec retry = prompt;
  retry.rendered_text += "\n\nYour previous answer did not follow the required format. ";
  retry.rendered_text += reminder;
  retry.rendered_text += '\n';
  return parse(client.Complete(retry));
}

template <typename T>
T CompleteWithGrammar(CompletionClient& client, const PromptSpec& prompt,
                      const std::function<T(std::string_view)>& parse,
                      std::string_view reminder) {
  return ParseOrReprompt(client, prompt, client.Complete(prompt), parse, reminder);
}

template std::size_t CompleteWithGrammar<std::size_t>(
    CompletionClient&, const PromptSpec&,
    const std::function<std::size_t(std::string_view)>&, std::string_view);
template std::string CompleteWithGrammar<std::string>(
    CompletionClient&, const PromptSpec&,
    const std::function<std::string(std::string_view)>&, std::string_view);

std::string_view ToString(SelectionSource s) {
  return s == SelectionSource::kVote ? "vote" : "llm";
}

SelectionStrategy ParseSelectionStrategy(std::string_view name) {
  if (name == "llm_only") return SelectionStrategy::kLlmOnly;
  if (name == "vote_then_llm") return SelectionStrategy::kVoteThenLlm;
  throw ValidationError("unknown selection strategy '" + std::string(name) + "'");
}

Selection SelectBest(const CandidateSet& cs, const std::vector<std::string>& contexts,
                     CompletionClient& client, SelectionStrategy strategy) {
  cs.Validate();
  if (strategy == SelectionStrategy::kVoteThenLlm) {
    if (auto winner = MajorityVote(cs)) {
      return Selection{std::move(*winner), SelectionSource::kVote, std::nullopt};
    }
  }
  const PromptSpec prompt = BuildSelectPrompt(cs, contexts);
  const std::function<std::size_t(std::string_view)> parse =
      [](std::string_view r) { return ParseSelectResponse(r); };
  const std::size_t index = CompleteWithGrammar(
      client, prompt, parse, "Answer with one number between 1 and 11 and nothing else.");
  return Selection{text::Trim(cs.candidates[index]), SelectionSource::kLlm, index};
}

constexpr std::string_view kFenceReminder =
    "Reply with the translation only, inside a single ``` fenced block.";

std::string CompleteFenced(CompletionClient& client, const PromptSpec& prompt) {
  return ParseFencedOrReprompt(client, prompt, client.Complete(prompt));
}

std::string ParseFencedOrReprompt(CompletionClient& client, const PromptSpec& prompt,
                                  std::string_view first_response) {
  const std::function<std::string(std::string_view)> parse =
      [](std::string_view r) { return ParseFencedResponse(r); };
  return ParseOrReprompt(client, prompt, first_response, parse, kFenceReminder);
}

std::string RefineTranslation(CompletionClient& client, std::string_view src_text,
                              std::string_view initial_translation,
                              const std::vector<TermPair>& terms,
                              std::string_view source_lang,
                              std::string_view target_lang) {
  return CompleteFenced(client, BuildRefinePrompt(src_text, initial_translation, terms,
                                                  source_lang, target_lang));
}

}  // namespace termforge
