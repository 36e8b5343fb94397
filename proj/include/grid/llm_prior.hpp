#pragma once

#include "grid/graph.hpp"

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace grid {

struct PromptSpec {
  std::string system_message;
  std::string user_message;
  std::string model = "gpt-3.5-turbo";
  double temperature = 1.0;
  double top_p = 0.8;
  int max_retries = 3;
  std::chrono::milliseconds base_backoff{500};

  void validate() const;
};

/// System and user messages for graph elicitation over `variables`.
PromptSpec build_prompt(const std::vector<Variable>& variables, const StructuralConstraints& constraints,
                        std::string_view environment = "smart room environment");

enum class ProviderKind { Remote, Mock };

std::string_view to_string(ProviderKind kind);

/// Source of chat completions. Implementations return the raw assistant text.
class PriorProvider {
 public:
  virtual ~PriorProvider() = default;
  virtual ProviderKind kind() const = 0;
  /// Throws TransportError for failures worth retrying.
  virtual std::string complete(const PromptSpec& prompt, const std::vector<Variable>& variables) const = 0;
};

/// Offline provider: proposes every Input/Mediator → every Output edge, using
/// only the variables' kind metadata.
class MockProvider final : public PriorProvider {
 public:
  ProviderKind kind() const override { return ProviderKind::Mock; }
  std::string complete(const PromptSpec& prompt, const std::vector<Variable>& variables) const override;
};

struct RemoteSettings {
  /// Base URL, e.g. https://api.openai.com
  std::string endpoint;
  std::string api_key;
  std::string model = "gpt-3.5-turbo";
  std::chrono::seconds timeout{60};

  /// Reads GRID_LLM_ENDPOINT, GRID_LLM_API_KEY and GRID_LLM_MODEL.
  static RemoteSettings from_environment();
};

/// OpenAI-compatible /v1/chat/completions client.
class RemoteProvider final : public PriorProvider {
 public:
  explicit RemoteProvider(RemoteSettings settings);
  ProviderKind kind() const override { return ProviderKind::Remote; }
  std::string complete(const PromptSpec& prompt, const std::vector<Variable>& variables) const override;

  const RemoteSettings& settings() const { return settings_; }

 private:
  RemoteSettings settings_;
};

/// JSON body sent to the chat endpoint.
std::string chat_request_body(const PromptSpec& prompt);
/// choices[0].message.content of a chat response; SchemaViolation otherwise.
std::string chat_response_content(std::string_view body);

/// First balanced {...} object in `text`, skipping braces inside strings.
std::optional<std::string> extract_json_object(std::string_view text);

using Sleeper = std::function<void(std::chrono::milliseconds)>;
Sleeper real_sleeper();

/// Parses an LLM graph answer: unknown names → SchemaViolation, self-loops
/// dropped, each cycle cut at its edge listed last in the answer, then the
/// constraints applied.
DirectedGraph parse_prior_graph(std::string_view text, const std::vector<Variable>& variables,
                                const StructuralConstraints& constraints);

/// Asks the provider, retrying transport failures and unparseable answers with
/// doubling backoff. PriorUnavailable once retries are exhausted.
DirectedGraph query_prior(const PriorProvider& provider, const PromptSpec& prompt,
                          const std::vector<Variable>& variables, const StructuralConstraints& constraints,
                          const Sleeper& sleep = real_sleeper());

/// Prompt asking for a single do(source = x*) value to test source → target.
PromptSpec build_intervention_prompt(const PromptSpec& base, const Variable& source, const Variable& target,
                                     double baseline_mean);

/// Proposed intervention value, or nullopt when the provider fails or the
/// answer carries no usable number.
std::optional<double> query_intervention_value(const PriorProvider& provider, const PromptSpec& prompt,
                                               const std::vector<Variable>& variables, const Sleeper& sleep);

}  // namespace grid
