#include "grid/llm_prior.hpp"

#include "grid/dataset.hpp"
#include "grid/errors.hpp"
#include "grid/graph_json.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <thread>

namespace grid {

void PromptSpec::validate() const {
  if (temperature < 0.0) throw InvalidArgument("temperature must be >= 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw InvalidArgument("top_p must lie in (0, 1]");
  if (max_retries < 0) throw InvalidArgument("max_retries must be >= 0");
}

PromptSpec build_prompt(const std::vector<Variable>& variables, const StructuralConstraints& constraints,
                        std::string_view environment) {
  if (variables.size() < 2) throw InvalidArgument("prompt needs at least two variables");
  std::string quoted, plain;
  for (std::size_t i = 0; i < variables.size(); ++i) {
    quoted += (i ? ", \"" : "\"") + variables[i].name + "\"";
    plain += (i ? ", " : "") + variables[i].name;
  }
  PromptSpec p;
  p.system_message = "You are an expert in causal discovery analyzing a " + std::string(environment) + " with " +
                     std::to_string(variables.size()) +
                     " variables.\n"
                     "Generate a causal DAG based on physical principles and environmental systems.\n"
                     "Return your answer as a JSON object with this format exactly:\n"
                     "{\"nodes\": [" + quoted + "],\n \"edges\": [[\"source\", \"target\"], ...]}";
  p.user_message = "Analyze this dataset with variables: " + plain +
                   "\n\nRules:\n"
                   "1. Include directed edges based on likely causal mechanisms\n"
                   "2. No cycles or self-loops allowed\n"
                   "3. Focus on primary physical relationships";
  int rule = 4;
  for (const auto& [s, t] : constraints.required_orientations)
    p.user_message += "\n" + std::to_string(rule++) + ". Include the edge " + s + " -> " + t;
  for (const auto& [s, t] : constraints.forbidden_edges)
    p.user_message += "\n" + std::to_string(rule++) + ". Do not include the edge " + s + " -> " + t;
  return p;
}

std::string_view to_string(ProviderKind kind) { return kind == ProviderKind::Remote ? "remote" : "mock"; }

std::string MockProvider::complete(const PromptSpec&, const std::vector<Variable>& variables) const {
  nlohmann::json doc{{"nodes", nlohmann::json::array()}, {"edges", nlohmann::json::array()}};
  for (const auto& v : variables) doc["nodes"].push_back(v.name);
  for (const auto& s : variables) {
    if (s.kind == VariableKind::Output) continue;
    for (const auto& t : variables)
      if (t.kind == VariableKind::Output) doc["edges"].push_back({s.name, t.name});
  }
  return doc.dump();
}

RemoteSettings RemoteSettings::from_environment() {
  RemoteSettings s;
  if (const char* e = std::getenv("GRID_LLM_ENDPOINT")) s.endpoint = e;
  if (const char* k = std::getenv("GRID_LLM_API_KEY")) s.api_key = k;
  if (const char* m = std::getenv("GRID_LLM_MODEL"); m && *m) s.model = m;
  if (s.endpoint.empty()) s.endpoint = "https://api.openai.com";
  return s;
}

RemoteProvider::RemoteProvider(RemoteSettings settings) : settings_(std::move(settings)) {}

std::string chat_request_body(const PromptSpec& prompt) {
  nlohmann::json body{{"model", prompt.model},
                      {"messages",
                       {{{"role", "system"}, {"content", prompt.system_message}},
                        {{"role", "user"}, {"content", prompt.user_message}}}},
                      {"temperature", prompt.temperature},
                      {"top_p", prompt.top_p}};
  return body.dump();
}

std::string chat_response_content(std::string_view body) {
  const auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw SchemaViolation("chat response is not JSON");
  try {
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaViolation("chat response has no choices[0].message.content");
  }
}

std::string RemoteProvider::complete(const PromptSpec& prompt, const std::vector<Variable>&) const {
  PromptSpec p = prompt;
  p.model = settings_.model;
  httplib::Client client(settings_.endpoint);
  if (!client.is_valid()) throw TransportError("cannot use endpoint '" + settings_.endpoint + "'");
  client.set_connection_timeout(settings_.timeout);
  client.set_read_timeout(settings_.timeout);
  httplib::Headers headers;
  if (!settings_.api_key.empty()) headers.emplace("Authorization", "Bearer " + settings_.api_key);
  auto res = client.Post("/v1/chat/completions", headers, chat_request_body(p), "application/json");
  if (!res) throw TransportError("chat request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw TransportError("chat endpoint returned HTTP " + std::to_string(res->status));
  return chat_response_content(res->body);
}

std::optional<std::string> extract_json_object(std::string_view text) {
  for (std::size_t start = text.find('{'); start != std::string_view::npos; start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false, escaped = false;
    for (std::size_t k = start; k < text.size(); ++k) {
      const char c = text[k];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        std::string candidate(text.substr(start, k - start + 1));
        if (nlohmann::json::accept(candidate)) return candidate;
        break;
      }
    }
  }
  return std::nullopt;
}

Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

namespace {

// Malformed answers are retried like transport failures.
class Unparseable : public Error {
 public:
  using Error::Error;
};

}  // namespace

DirectedGraph parse_prior_graph(std::string_view text, const std::vector<Variable>& variables,
                                const StructuralConstraints& constraints) {
  const auto object = extract_json_object(text);
  if (!object) throw Unparseable("no JSON object in the answer");
  const auto doc = nlohmann::json::parse(*object);
  if (!doc.contains("edges") || !doc["edges"].is_array()) throw Unparseable("answer has no edge list");

  const DirectedGraph empty(variables);
  if (doc.contains("nodes") && doc["nodes"].is_array())
    for (const auto& name : doc["nodes"]) {
      if (!name.is_string() || !empty.index_of(name.get<std::string>()))
        throw SchemaViolation("answer names unknown node " + name.dump());
    }

  std::vector<Edge> edges;
  for (const auto& e : doc["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
      throw Unparseable("malformed edge " + e.dump());
    const auto s = empty.index_of(e[0].get<std::string>());
    const auto t = empty.index_of(e[1].get<std::string>());
    if (!s || !t) throw SchemaViolation("edge " + e.dump() + " names an unknown node");
    if (*s == *t) continue;
    const Edge edge{*s, *t};
    if (std::find(edges.begin(), edges.end(), edge) == edges.end()) edges.push_back(edge);
  }

  // Break cycles at whichever of their edges the answer listed last.
  AdjacencyMatrix a = AdjacencyMatrix::Zero(empty.size(), empty.size());
  for (const auto& e : edges) a(e.source, e.target) = 1;
  for (auto cycle = find_cycle(a); !cycle.empty(); cycle = find_cycle(a)) {
    auto pos = [&](const Edge& e) { return std::find(edges.begin(), edges.end(), e) - edges.begin(); };
    const Edge last = *std::max_element(cycle.begin(), cycle.end(),
                                        [&](const Edge& x, const Edge& y) { return pos(x) < pos(y); });
    a(last.source, last.target) = 0;
  }
  return apply_constraints(empty.with_adjacency(std::move(a)), constraints);
}

namespace {

template <typename F>
auto with_retries(const PromptSpec& prompt, const Sleeper& sleep, F&& attempt) -> decltype(attempt()) {
  prompt.validate();
  std::string last_error;
  for (int tried = 0; tried <= prompt.max_retries; ++tried) {
    if (tried > 0) sleep(prompt.base_backoff * (1LL << (tried - 1)));
    try {
      return attempt();
    } catch (const TransportError& e) {
      last_error = e.what();
    } catch (const Unparseable& e) {
      last_error = e.what();
    } catch (const nlohmann::json::exception& e) {
      last_error = e.what();
    }
  }
  throw PriorUnavailable("prior provider failed after " + std::to_string(prompt.max_retries + 1) +
                         " attempts: " + last_error);
}

}  // namespace

DirectedGraph query_prior(const PriorProvider& provider, const PromptSpec& prompt,
                          const std::vector<Variable>& variables, const StructuralConstraints& constraints,
                          const Sleeper& sleep) {
  return with_retries(prompt, sleep, [&] {
    return parse_prior_graph(provider.complete(prompt, variables), variables, constraints);
  });
}

PromptSpec build_intervention_prompt(const PromptSpec& base, const Variable& source, const Variable& target,
                                     double baseline_mean) {
  PromptSpec p = base;
  p.user_message = "We want to test whether " + source.name + " causally affects " + target.name +
                   ".\nPropose one intervention do(" + source.name + " = x) that maximises contrast with the current "
                   "operating point.\n" + source.name + " is currently around " + format_number(baseline_mean) +
                   " " + source.unit + " and must stay within [" + format_number(source.bounds.low) + ", " +
                   format_number(source.bounds.high) + "].\n"
                   "Return your answer as a JSON object with this format exactly:\n"
                   "{\"variable\": \"" + source.name + "\", \"value\": <number>}";
  return p;
}

std::optional<double> query_intervention_value(const PriorProvider& provider, const PromptSpec& prompt,
                                               const std::vector<Variable>& variables, const Sleeper& sleep) {
  try {
    return with_retries(prompt, sleep, [&]() -> double {
      const auto object = extract_json_object(provider.complete(prompt, variables));
      if (!object) throw Unparseable("no JSON object in the answer");
      const auto doc = nlohmann::json::parse(*object);
      if (!doc.contains("value") || !doc["value"].is_number()) throw Unparseable("answer has no numeric value");
      return doc["value"].get<double>();
    });
  } catch (const PriorUnavailable&) {
    return std::nullopt;
  } catch (const SchemaViolation&) {
    return std::nullopt;
  }
}

}  // namespace grid
