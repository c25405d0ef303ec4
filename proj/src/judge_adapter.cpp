#include <cctype>

#include "cbias/assets.hpp"
#include "cbias/judge.hpp"
#include "cbias/truth_table.hpp"

namespace cbias {

std::optional<bool> parse_binary_reply(std::string_view reply) {
  std::string word;
  for (unsigned char c : reply) {
    if (std::isalpha(c)) {
      word += static_cast<char>(std::tolower(c));
    } else if (!word.empty()) {
      break;
    }
  }
  if (word == "yes" || word == "true") return true;
  if (word == "no" || word == "false") return false;
  return std::nullopt;
}

std::string rule_guidance(std::string_view rule_name) {
  const std::string_view text = asset("judge/guidance.txt");
  const std::string header = "[" + std::string(rule_name) + "]\n";
  const auto pos = text.find(header);
  if (pos == std::string_view::npos) {
    return "ACCEPT: statements with the same meaning as the ground-truth rule.\n"
           "REJECT: broader or narrower statements, or a different rule family.";
  }
  const auto start = pos + header.size();
  auto end = text.find("\n[", start);
  if (end == std::string_view::npos) end = text.size();
  std::string body(text.substr(start, end - start));
  while (!body.empty() && (body.back() == '\n' || body.back() == ' ')) body.pop_back();
  return body;
}

LlmJudgeAdapter::LlmJudgeAdapter(EndpointConfig config, int repair_cap)
    : client_(std::move(config)), repair_cap_(std::max(1, repair_cap)) {}

std::string LlmJudgeAdapter::ask(const std::vector<ChatMessage>& messages) {
  ++calls_;
  return strip_think(client_.complete(messages, 0.0).content);
}

std::optional<bool> LlmJudgeAdapter::wason_correct(std::string_view announcement, std::string_view target_name,
                                                   bool dual_goal) {
  const auto tmpl = asset(dual_goal ? "prompts/judge_correctness_dual_goal.txt" : "prompts/judge_correctness_wason.txt");
  const auto prompt = fill_template(tmpl, {{"rule_guidance", rule_guidance(target_name)},
                                           {"announced_rule", std::string(announcement)},
                                           {"ground_truth_rule", std::string(target_name)}});
  return parse_binary_reply(ask({{"user", prompt}}));
}

std::optional<bool> LlmJudgeAdapter::blicket_correct(std::string_view announcement, const BlicketRule& target) {
  const auto prompt = fill_template(asset("prompts/judge_correctness_blicket.txt"),
                                    {{"true_blickets", format_objects(target.relevant)},
                                     {"true_rule", std::string(kind_name(target.kind))},
                                     {"announce_text", std::string(announcement)}});
  return parse_binary_reply(ask({{"user", prompt}}));
}

namespace {

// First non-empty line with code fences and backticks removed.
std::string answer_line(const std::string& reply) {
  std::size_t start = 0;
  while (start < reply.size()) {
    auto end = reply.find('\n', start);
    if (end == std::string::npos) end = reply.size();
    std::string line = reply.substr(start, end - start);
    start = end + 1;
    std::erase(line, '`');
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
    if (line == "python" || line == "text") continue;
    return line;
  }
  return {};
}

// Runs the request, feeding errors back, until `accept` yields a value or the
// cap is reached.
template <typename T, typename Accept>
std::optional<T> repair_loop(std::string prompt, int cap, Accept accept,
                             const std::function<std::string(const std::vector<ChatMessage>&)>& ask) {
  std::vector<ChatMessage> messages{{"user", std::move(prompt)}};
  for (int attempt = 0; attempt < cap; ++attempt) {
    const std::string reply = ask(messages);
    std::string error;
    if (auto value = accept(answer_line(reply), error)) return value;
    messages.push_back({"assistant", reply});
    messages.push_back({"user", fill_template(asset("judge/translate_repair.txt"), {{"ERROR", error}})});
  }
  return std::nullopt;
}

}  // namespace

std::optional<RuleExpr> LlmJudgeAdapter::translate_wason(std::string_view hypothesis) {
  const auto prompt = fill_template(asset("judge/translate_wason.txt"), {{"HYPOTHESIS", std::string(hypothesis)}});
  return repair_loop<RuleExpr>(
      prompt, repair_cap_,
      [](const std::string& line, std::string& error) -> std::optional<RuleExpr> {
        try {
          auto expr = parse_rule(line);
          truth_table(expr);  // must evaluate on the whole domain
          return expr;
        } catch (const RuleError& e) {
          error = e.what();
          return std::nullopt;
        }
      },
      [this](const std::vector<ChatMessage>& m) { return ask(m); });
}

std::optional<BlicketRule> LlmJudgeAdapter::translate_blicket(std::string_view hypothesis, int num_objects) {
  const auto prompt = fill_template(asset("judge/translate_blicket.txt"),
                                    {{"HYPOTHESIS", std::string(hypothesis)}, {"MAX_ID", std::to_string(num_objects - 1)}});
  return repair_loop<BlicketRule>(
      prompt, repair_cap_,
      [num_objects](const std::string& line, std::string& error) -> std::optional<BlicketRule> {
        const auto h = parse_blicket_hypothesis(line, num_objects);
        if (!h) {
          error = "expected relevant=[object i, ...]; rule=<kind> with object ids below " +
                  std::to_string(num_objects);
          return std::nullopt;
        }
        auto rule = to_blicket_rule(*h);
        if (!rule) error = "unrecognised rule kind '" + h->rule_text + "'";
        return rule;
      },
      [this](const std::vector<ChatMessage>& m) { return ask(m); });
}

}  // namespace cbias
