#include "cli_support.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "riskcal/detection_data.hpp"
#include "riskcal/error.hpp"

namespace riskcal::cli {

using nlohmann::json;

namespace {

std::string flag_name(const std::string& token) {
    if (token.rfind("--", 0) != 0) return {};
    const auto eq = token.find('=');
    return token.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
}

std::string scalar_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        } else {
            out.push_back(args[i]);
        }
    }
    if (config_path.empty()) return out;

    json doc = read_json_file(config_path);
    if (doc.is_object() && doc.contains("config") && doc.contains("command")) doc = doc.at("config");
    if (!doc.is_object()) throw ValidationError(config_path + ": config must be a JSON object");

    std::set<std::string> given;
    for (const auto& a : out) {
        if (auto name = flag_name(a); !name.empty()) given.insert(name);
    }
    std::vector<std::string> from_file;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (given.count(it.key()) != 0) continue;
        const json& v = it.value();
        if (v.is_boolean()) {
            if (v.get<bool>()) from_file.push_back("--" + it.key());
        } else if (v.is_array()) {
            for (const json& e : v) from_file.push_back("--" + it.key() + "=" + scalar_text(e));
        } else if (!v.is_null()) {
            from_file.push_back("--" + it.key() + "=" + scalar_text(v));
        }
    }
    // Flags go after the subcommand name, which is the first token.
    auto pos = out.empty() ? out.end() : out.begin() + 1;
    out.insert(pos, from_file.begin(), from_file.end());
    return out;
}

json options_echo(const CLI::App& app) {
    json echo = json::object();
    for (const CLI::Option* opt : app.get_options()) {
        const std::string name = opt->get_lnames().empty() ? std::string() : opt->get_lnames().front();
        if (name.empty() || name == "help" || name == "config") continue;
        if (opt->get_expected_max() == 0) {
            echo[name] = opt->count() > 0;
            continue;
        }
        std::vector<std::string> values = opt->results();
        if (values.empty() && !opt->get_default_str().empty()) values = {opt->get_default_str()};
        auto convert = [](const std::string& s) {
            try {
                json v = json::parse(s);
                if (v.is_number()) return v;
            } catch (const json::exception&) {
            }
            return json(s);
        };
        if (values.empty()) continue;
        if (opt->get_expected_max() > 1) {
            json arr = json::array();
            for (const auto& s : values) arr.push_back(convert(s));
            echo[name] = std::move(arr);
        } else {
            echo[name] = convert(values.back());
        }
    }
    return echo;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string data = buf.str();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw IoError("sha256 failed for '" + path.string() + "'");
    }
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

void write_manifest(const Manifest& m) {
    if (m.outputs.empty()) return;
    json inputs = json::object();
    for (const auto& p : m.inputs) inputs[p.string()] = sha256_file(p);
    json outputs = json::object();
    for (const auto& p : m.outputs) outputs[p.string()] = sha256_file(p);

    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::ostringstream stamp;
    stamp << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");

    json doc{{"command", m.command},
             {"tool_version", kToolVersion},
             {"config", m.config},
             {"inputs", std::move(inputs)},
             {"outputs", std::move(outputs)},
             {"seeds", m.seeds},
             {"timestamp", stamp.str()}};
    write_text_file(m.outputs.front().string() + ".manifest.json", doc.dump(2) + "\n");
}

}  // namespace riskcal::cli
