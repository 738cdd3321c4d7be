#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mlconf/backend.hpp"

namespace testsupport {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("mlconf-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Offline translator: echoes the request text word by word with a marker
// prefix. A lossy translator additionally drops a text-dependent subset of
// words, so agreement with the faithful one varies per item and language.
inline mlconf::backend::MockScript synthetic_translator(bool lossy) {
    mlconf::backend::MockScript s;
    s.with_responder([lossy](const mlconf::backend::GenerationRequest& r,
                             int) -> std::optional<mlconf::backend::ScriptedResponse> {
        const auto& text = r.prompt_messages.back().text;
        // Drops mostly depend on the text itself, with a smaller share from the
        // whole prompt, which names the target language.
        const auto fnv = [](std::string_view bytes) {
            std::uint64_t h = 1469598103934665603ull;
            for (unsigned char c : bytes) h = (h ^ c) * 1099511628211ull;
            return h;
        };
        const std::uint64_t item_hash = fnv(text);
        const std::uint64_t lang_hash = fnv(mlconf::backend::prompt_text(r));
        std::istringstream in(text);
        std::vector<std::string> words;
        for (std::string w; in >> w;) words.push_back(w);
        std::string out;
        for (std::size_t i = 0; i < words.size(); ++i) {
            const bool drop = (item_hash >> (i % 60)) % 4 == 0 || (lang_hash >> (i % 60)) % 9 == 0;
            if (lossy && words.size() > 1 && drop) continue;
            out += (out.empty() ? "" : " ") + std::string("tr-") + words[i];
        }
        if (out.empty()) out = "tr-" + words.front();
        return mlconf::backend::ScriptedResponse{out, {}, {}, {}};
    });
    return s;
}

}  // namespace testsupport
