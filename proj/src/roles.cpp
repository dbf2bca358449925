#include "deceptor/roles.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

namespace deceptor::roles {

namespace {

std::string lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string complete_checked(const RoleBinding& binding, const ChatHistory& history) {
    if (!binding.provider) {
        throw Error("role '" + to_string(binding.role) + "' has no provider bound");
    }
    return binding.provider->complete(history);
}

}  // namespace

std::string to_string(RoleName r) {
    switch (r) {
        case RoleName::target: return "target";
        case RoleName::reasoning: return "reasoning";
        case RoleName::red: return "red";
        case RoleName::attacking: return "attacking";
        case RoleName::sim_checker: return "sim_checker";
        case RoleName::paraphraser: return "paraphraser";
        case RoleName::detector: return "detector";
    }
    return "target";
}

RoleName role_from_string(const std::string& s) {
    if (s == "target") return RoleName::target;
    if (s == "reasoning") return RoleName::reasoning;
    if (s == "red") return RoleName::red;
    if (s == "attacking") return RoleName::attacking;
    if (s == "sim_checker") return RoleName::sim_checker;
    if (s == "paraphraser") return RoleName::paraphraser;
    if (s == "detector") return RoleName::detector;
    throw Error("unknown role '" + s + "'");
}

const std::vector<std::string>& required_placeholders(RoleName role) {
    static const std::vector<std::string> target{"input"};
    static const std::vector<std::string> reasoning{"input", "label"};
    static const std::vector<std::string> red{"original", "label", "reason", "feedback"};
    static const std::vector<std::string> sim{"original", "candidate"};
    static const std::vector<std::string> none{};
    switch (role) {
        case RoleName::target: return target;
        case RoleName::reasoning: return reasoning;
        case RoleName::red: return red;
        case RoleName::sim_checker: return sim;
        default: return none;
    }
}

void validate_template(const std::string& tmpl, const std::vector<std::string>& required) {
    for (const auto& name : required) {
        if (tmpl.find("{" + name + "}") == std::string::npos) {
            throw TemplateError("template is missing required placeholder {" + name + "}");
        }
    }
}

RoleBinding make_binding(RoleName role, std::shared_ptr<providers::Provider> provider,
                         std::string template_text) {
    RoleBinding binding;
    binding.role = role;
    binding.provider = std::move(provider);
    binding.template_text =
        template_text.empty() ? default_template(role) : std::move(template_text);
    validate_template(binding.template_text, required_placeholders(role));
    return binding;
}

std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        auto open = tmpl.find('{', pos);
        if (open == std::string::npos) {
            out.append(tmpl, pos, std::string::npos);
            break;
        }
        out.append(tmpl, pos, open - pos);
        auto close = tmpl.find('}', open);
        if (close == std::string::npos) {
            out.append(tmpl, open, std::string::npos);
            break;
        }
        const std::string name = tmpl.substr(open + 1, close - open - 1);
        auto it = values.find(name);
        if (it != values.end()) {
            out += it->second;
        } else {
            out.append(tmpl, open, close - open + 1);
        }
        pos = close + 1;
    }
    return out;
}

ClassLabel VerdictMap::map(const std::string& verdict) const {
    const std::string hay = lower(verdict);
    for (const auto& rule : rules) {
        if (rule.kind == VerdictRule::Kind::keyword) {
            if (hay.find(lower(rule.pattern)) != std::string::npos) return rule.label;
        } else {
            std::regex re(rule.pattern, std::regex::icase);
            if (std::regex_search(verdict, re)) return rule.label;
        }
    }
    if (fallback) return *fallback;
    throw UnmappableVerdict("no verdict rule matched: \"" + verdict + "\"");
}

void VerdictMap::validate(const std::vector<ClassLabel>& labels) const {
    for (const auto& label : labels) {
        bool reachable = std::any_of(rules.begin(), rules.end(), [&](const VerdictRule& r) {
            return r.label == label;
        });
        if (!reachable && !(fallback && *fallback == label)) {
            throw Error("label '" + label.id + "' is unreachable in the verdict map");
        }
    }
}

std::string render_fields(const Sample& s) {
    std::string out;
    for (const auto& [key, value] : s.fields) {
        if (!out.empty()) out += '\n';
        out += key + ": " + value;
    }
    return out;
}

ClassLabel classify(const RoleBinding& binding, const Sample& s, const VerdictMap& vmap) {
    ChatHistory history;
    history.append(MessageRole::user,
                   render_template(binding.template_text, {{"input", render_fields(s)}}));
    const std::string verdict = complete_checked(binding, history);
    return vmap.map(verdict);
}

std::string explain_prediction(const RoleBinding& binding, const std::string& text,
                               const ClassLabel& predicted) {
    ChatHistory history;
    history.append(MessageRole::user,
                   render_template(binding.template_text,
                                   {{"input", text}, {"label", predicted.display}}));
    const std::string reason = complete_checked(binding, history);
    if (trim(reason).empty()) {
        throw RoleEmptyOutput("reasoning role returned an empty rationale");
    }
    return reason;
}

std::pair<std::string, ChatHistory> craft_instruction(const RoleBinding& binding,
                                                      const RedContext& context,
                                                      ChatHistory red_history) {
    if (!red_history.empty() && red_history.back().role != MessageRole::assistant) {
        throw Error("red history must be empty or end with an assistant message");
    }
    const std::string turn =
        render_template(binding.template_text, {{"original", context.original},
                                                {"candidate", context.candidate.value_or("")},
                                                {"label", context.label.display},
                                                {"reason", context.reason},
                                                {"feedback", context.feedback.value_or("")}});
    red_history.append(MessageRole::user, turn);
    const std::string instruction = complete_checked(binding, red_history);
    if (trim(instruction).empty()) {
        throw RoleEmptyOutput("red role returned an empty instruction");
    }
    red_history.append(MessageRole::assistant, instruction);
    return {instruction, std::move(red_history)};
}

std::pair<std::string, ChatHistory> perturb(const RoleBinding& binding,
                                            const std::string& instruction,
                                            ChatHistory attack_history,
                                            bool verbose_filter) {
    if (instruction.empty()) throw Error("perturb requires a nonempty instruction");
    attack_history.append(MessageRole::user, instruction);
    const std::string reply = complete_checked(binding, attack_history);
    attack_history.append(MessageRole::assistant, reply);
    const std::string candidate = verbose_filter ? apply_verbose_filter(reply) : trim(reply);
    if (candidate.empty()) {
        throw RoleEmptyOutput("attacking role produced an empty candidate");
    }
    return {candidate, std::move(attack_history)};
}

SimilarityScore similarity(const RoleBinding& binding, const std::string& original,
                           const std::string& candidate) {
    if (original.empty() || candidate.empty()) {
        throw Error("similarity requires nonempty original and candidate texts");
    }
    ChatHistory history;
    history.append(MessageRole::user,
                   render_template(binding.template_text,
                                   {{"original", original}, {"candidate", candidate}}));
    const std::string reply = complete_checked(binding, history);
    auto value = parse_score_in_range(apply_verbose_filter(reply));
    if (!value) {
        throw UnparsableScore("similarity reply contains no number in [1, 10]", reply);
    }
    return SimilarityScore{*value, reply};
}

std::string paraphrase(const RoleBinding& binding, const std::string& text) {
    if (text.empty()) throw Error("paraphrase requires nonempty text");
    ChatHistory history;
    history.append(MessageRole::system, binding.template_text);
    history.append(MessageRole::user, text);
    return complete_checked(binding, history);
}

const std::vector<std::string>& default_preamble_prefixes() {
    static const std::vector<std::string> prefixes{"here is", "sure,", "revised text:"};
    return prefixes;
}

std::string apply_verbose_filter(const std::string& reply) {
    return apply_verbose_filter(reply, default_preamble_prefixes());
}

std::string apply_verbose_filter(const std::string& reply,
                                 const std::vector<std::string>& preamble_prefixes) {
    // 1. drop preamble lines
    std::vector<std::string> kept;
    std::istringstream in(reply);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string probe = lower(trim(line));
        bool preamble = std::any_of(preamble_prefixes.begin(), preamble_prefixes.end(),
                                    [&](const std::string& p) {
                                        return probe.rfind(lower(p), 0) == 0 && !probe.empty();
                                    });
        if (!preamble) kept.push_back(line);
    }

    // 2. longest contiguous block of nonblank lines (by character count)
    std::vector<std::string> best, current;
    std::size_t best_len = 0, current_len = 0;
    auto flush = [&]() {
        if (current_len > best_len) {
            best = current;
            best_len = current_len;
        }
        current.clear();
        current_len = 0;
    };
    for (const auto& l : kept) {
        if (trim(l).empty()) {
            flush();
        } else {
            current.push_back(l);
            current_len += l.size();
        }
    }
    flush();

    std::string out;
    for (std::size_t i = 0; i < best.size(); ++i) {
        if (i) out += '\n';
        out += best[i];
    }
    out = trim(out);

    // 3. strip symmetric wrapping quotes
    static const std::vector<std::pair<std::string, std::string>> wrappers{
        {"«", "»"},      // « »
        {"“", "”"},      // “ ”
        {"‘", "’"},      // ‘ ’
        {"\"", "\""},
        {"'", "'"},
        {"`", "`"},
    };
    bool stripped = true;
    while (stripped && !out.empty()) {
        stripped = false;
        for (const auto& [open, close] : wrappers) {
            if (out.size() > open.size() + close.size() &&
                out.compare(0, open.size(), open) == 0 &&
                out.compare(out.size() - close.size(), close.size(), close) == 0) {
                out = trim(out.substr(open.size(), out.size() - open.size() - close.size()));
                stripped = true;
                break;
            }
        }
    }
    return out;
}

std::optional<double> parse_score_in_range(const std::string& text) {
    static const std::regex number(R"(\d+(\.\d+)?)");
    for (auto it = std::sregex_iterator(text.begin(), text.end(), number);
         it != std::sregex_iterator(); ++it) {
        const double value = std::stod(it->str());
        if (value >= 1.0 && value <= 10.0) return value;
    }
    return std::nullopt;
}

}  // namespace deceptor::roles
