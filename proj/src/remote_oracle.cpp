#include "tabfuse/oracle.hpp"

#include <cstdlib>

#include "httplib.h"

namespace tabfuse {

using nlohmann::json;

namespace {

// "http://host:port/v1" -> ("http://host:port", "/v1")
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  const size_t scheme = endpoint.find("://");
  const size_t path = scheme == std::string::npos ? endpoint.find('/')
                                                  : endpoint.find('/', scheme + 3);
  if (path == std::string::npos) return {endpoint, ""};
  std::string prefix = endpoint.substr(path);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {endpoint.substr(0, path), prefix};
}

}  // namespace

RemoteOracle::RemoteOracle(OracleSettings settings) : Oracle(std::move(settings)) {
  auto [host, prefix] = split_endpoint(settings_.endpoint);
  host_ = host;
  path_prefix_ = prefix;
  if (const char* key = std::getenv(settings_.api_key_env.c_str())) api_key_ = key;
}

Oracle::Completion RemoteOracle::complete(const OracleRequest& request,
                                          const std::string& repair_note) {
  httplib::Client client(host_);
  client.set_read_timeout(120, 0);
  client.set_connection_timeout(10, 0);

  json messages = json::array();
  messages.push_back({{"role", "system"}, {"content", request.system_text}});
  std::string user = request.user_text;
  user += "\n\nReply with JSON only. Required reply format: " +
          request.response_contract.description;
  if (!repair_note.empty()) user += "\n\n" + repair_note;
  messages.push_back({{"role", "user"}, {"content", user}});

  json body{{"model", settings_.model}, {"messages", messages}, {"temperature", 0}};

  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto res = client.Post(path_prefix_ + "/chat/completions", headers, body.dump(),
                         "application/json");
  if (!res) throw std::runtime_error("chat transport error: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw std::runtime_error("chat HTTP " + std::to_string(res->status) + ": " + res->body);

  json j = json::parse(res->body);
  Completion c;
  c.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
  if (j.contains("usage")) {
    c.input_units = j["usage"].value("prompt_tokens", 0);
    c.output_units = j["usage"].value("completion_tokens", 0);
  }
  return c;
}

std::vector<EmbeddingVector> RemoteOracle::embed_transport(const std::vector<std::string>& texts,
                                                           std::int64_t& input_units) {
  httplib::Client client(host_);
  client.set_read_timeout(120, 0);
  client.set_connection_timeout(10, 0);

  json body{{"model", settings_.embed_model}, {"input", texts}};
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto res = client.Post(path_prefix_ + "/embeddings", headers, body.dump(), "application/json");
  if (!res)
    throw std::runtime_error("embeddings transport error: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw std::runtime_error("embeddings HTTP " + std::to_string(res->status) + ": " + res->body);

  json j = json::parse(res->body);
  std::vector<EmbeddingVector> out(texts.size());
  for (const auto& item : j.at("data")) {
    const size_t idx = item.at("index").get<size_t>();
    const auto& vals = item.at("embedding");
    EmbeddingVector v(vals.size());
    for (size_t d = 0; d < vals.size(); ++d)
      v[static_cast<Eigen::Index>(d)] = vals[d].get<float>();
    if (idx >= out.size()) throw std::runtime_error("embeddings: index out of range");
    out[idx] = std::move(v);
  }
  input_units = j.contains("usage") ? j["usage"].value("prompt_tokens", 0) : 0;
  return out;
}

}  // namespace tabfuse
