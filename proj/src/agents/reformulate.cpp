#include "chartattrib/agents/reformulate.hpp"

#include <set>

#include "chartattrib/core/errors.hpp"
#include "chartattrib/prompts/catalog.hpp"

namespace chartattrib::agents {

ClaimSet decompose_answer(llm::Gateway& gateway, llm::Backend& backend,
                          const std::string& question, const std::string& answer) {
  if (answer.empty()) throw Error("cannot decompose an empty answer");
  const auto& tpl = prompts::get("reformulate");
  std::string user = prompts::render(tpl.user, {{"question", question}, {"answer", answer}});
  llm::Prompt prompt = llm::make_prompt(tpl.system, {llm::TextPart{user}});
  nlohmann::json schema = {
      {"type", "object"},
      {"required", {"claims"}},
      {"properties", {{"claims", {{"type", "array"}, {"items", {{"type", "string"}}}}}}}};
  nlohmann::json v = gateway.complete_structured(backend, prompt, schema);

  ClaimSet out;
  out.source_answer = answer;
  std::set<std::string> seen;
  for (const auto& jc : v.at("claims")) {
    std::string text = jc.get<std::string>();
    if (text.empty() || seen.count(text)) continue;
    seen.insert(text);
    out.claims.push_back({int(out.claims.size()), std::move(text)});
  }
  if (out.claims.empty()) {
    out.claims.push_back({0, answer});
  }
  return out;
}

}  // namespace chartattrib::agents
