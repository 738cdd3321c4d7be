// Writes the bundled 50-item, three-language mock fixture: English source
// items, mock scripts for the answer/judge model and two translators, and a
// pipeline config. Output is fully determined by kSeed.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "mlconf/backend.hpp"
#include "mlconf/dataset.hpp"
#include "mlconf/eval.hpp"
#include "mlconf/prompts.hpp"
#include "mlconf/text.hpp"
#include "mlconf/util.hpp"

namespace {

using namespace mlconf;
namespace fs = std::filesystem;

constexpr std::uint64_t kSeed = 20240611;
// Distinct answer samples scripted per question; matches the temperature-sampling count.
constexpr std::size_t kSamples = 5;

struct Row {
    const char* en_q;
    std::vector<std::string> en_a;
    const char* fr_q;
    const char* fr_a;
    const char* zh_q;
    const char* zh_a;
};

const std::vector<Row>& rows() {
    static const std::vector<Row> r = {
        {"What is the capital of Japan?", {"Tokyo"}, "Quelle est la capitale du Japon ?", "Tokyo", "日本的首都是哪里？", "东京"},
        {"What is the capital of Italy?", {"Rome"}, "Quelle est la capitale de l'Italie ?", "Rome", "意大利的首都是哪里？", "罗马"},
        {"What is the capital of Canada?", {"Ottawa"}, "Quelle est la capitale du Canada ?", "Ottawa", "加拿大的首都是哪里？", "渥太华"},
        {"What is the capital of Australia?", {"Canberra"}, "Quelle est la capitale de l'Australie ?", "Canberra", "澳大利亚的首都是哪里？", "堪培拉"},
        {"What is the capital of Egypt?", {"Cairo"}, "Quelle est la capitale de l'Égypte ?", "Le Caire", "埃及的首都是哪里？", "开罗"},
        {"Which planet is the largest in the Solar System?", {"Jupiter"}, "Quelle est la plus grande planète du système solaire ?", "Jupiter", "太阳系中最大的行星是哪颗？", "木星"},
        {"Which planet is closest to the Sun?", {"Mercury"}, "Quelle planète est la plus proche du Soleil ?", "Mercure", "离太阳最近的行星是哪颗？", "水星"},
        {"Who painted the Mona Lisa?", {"Leonardo da Vinci", "da Vinci"}, "Qui a peint la Joconde ?", "Léonard de Vinci", "谁画了《蒙娜丽莎》？", "列奥纳多·达·芬奇"},
        {"Who wrote the novel War and Peace?", {"Leo Tolstoy", "Tolstoy"}, "Qui a écrit le roman Guerre et Paix ?", "Léon Tolstoï", "谁写了小说《战争与和平》？", "列夫·托尔斯泰"},
        {"What is the chemical symbol for sodium?", {"Na"}, "Quel est le symbole chimique du sodium ?", "Na", "钠的化学符号是什么？", "Na"},
        {"What is the largest ocean on Earth?", {"Pacific Ocean", "Pacific"}, "Quel est le plus grand océan de la Terre ?", "L'océan Pacifique", "地球上最大的海洋是哪个？", "太平洋"},
        {"What is the longest river in Africa?", {"Nile"}, "Quel est le plus long fleuve d'Afrique ?", "Le Nil", "非洲最长的河流是哪条？", "尼罗河"},
        {"Which country is home to the kangaroo?", {"Australia"}, "Dans quel pays vit le kangourou à l'état sauvage ?", "Australie", "袋鼠原产于哪个国家？", "澳大利亚"},
        {"How many sides does a hexagon have?", {"Six", "6"}, "Combien de côtés a un hexagone ?", "Six", "六边形有几条边？", "六"},
        {"What is the freezing point of water in degrees Celsius?", {"0", "zero"}, "Quel est le point de congélation de l'eau en degrés Celsius ?", "0", "水的冰点是多少摄氏度？", "0"},
        {"Who developed the theory of relativity?", {"Albert Einstein", "Einstein"}, "Qui a développé la théorie de la relativité ?", "Albert Einstein", "谁提出了相对论？", "爱因斯坦"},
        {"What is the hardest natural substance?", {"Diamond"}, "Quelle est la substance naturelle la plus dure ?", "Le diamant", "最坚硬的天然物质是什么？", "钻石"},
        {"In which country is Machu Picchu?", {"Peru"}, "Dans quel pays se trouve le Machu Picchu ?", "Pérou", "马丘比丘位于哪个国家？", "秘鲁"},
        {"What is the currency of the United Kingdom?", {"Pound sterling", "pound"}, "Quelle est la monnaie du Royaume-Uni ?", "La livre sterling", "英国的货币是什么？", "英镑"},
        {"Who was the first person to walk on the Moon?", {"Neil Armstrong", "Armstrong"}, "Qui a été le premier homme à marcher sur la Lune ?", "Neil Armstrong", "第一个在月球上行走的人是谁？", "尼尔·阿姆斯特朗"},
        {"What is the smallest prime number?", {"2", "two"}, "Quel est le plus petit nombre premier ?", "2", "最小的质数是多少？", "2"},
        {"Which gas do plants absorb from the atmosphere?", {"Carbon dioxide", "CO2"}, "Quel gaz les plantes absorbent-elles dans l'atmosphère ?", "Le dioxyde de carbone", "植物从大气中吸收哪种气体？", "二氧化碳"},
        {"What is the tallest mountain in the world?", {"Mount Everest", "Everest"}, "Quelle est la plus haute montagne du monde ?", "L'Everest", "世界上最高的山是哪座？", "珠穆朗玛峰"},
        {"Which composer wrote the Moonlight Sonata?", {"Ludwig van Beethoven", "Beethoven"}, "Quel compositeur a écrit la Sonate au clair de lune ?", "Beethoven", "《月光奏鸣曲》是哪位作曲家创作的？", "贝多芬"},
        {"What is the largest desert in Africa?", {"Sahara"}, "Quel est le plus grand désert d'Afrique ?", "Le Sahara", "非洲最大的沙漠是哪个？", "撒哈拉沙漠"},
        {"What language is spoken in Brazil?", {"Portuguese"}, "Quelle langue parle-t-on au Brésil ?", "Le portugais", "巴西人说什么语言？", "葡萄牙语"},
        {"How many players does a football team have on the field?", {"Eleven", "11"}, "Combien de joueurs une équipe de football a-t-elle sur le terrain ?", "Onze", "一支足球队在场上有几名球员？", "十一"},
        {"Which organ pumps blood through the human body?", {"Heart"}, "Quel organe pompe le sang dans le corps humain ?", "Le cœur", "人体中哪个器官负责泵血？", "心脏"},
        {"What is the capital of Spain?", {"Madrid"}, "Quelle est la capitale de l'Espagne ?", "Madrid", "西班牙的首都是哪里？", "马德里"},
        {"What is the capital of Russia?", {"Moscow"}, "Quelle est la capitale de la Russie ?", "Moscou", "俄罗斯的首都是哪里？", "莫斯科"},
        {"Who wrote Pride and Prejudice?", {"Jane Austen", "Austen"}, "Qui a écrit Orgueil et Préjugés ?", "Jane Austen", "谁写了《傲慢与偏见》？", "简·奥斯汀"},
        {"What is the boiling point of water at sea level in degrees Celsius?", {"100"}, "Quel est le point d'ébullition de l'eau au niveau de la mer en degrés Celsius ?", "100", "在海平面上，水的沸点是多少摄氏度？", "100"},
        {"Which element has the atomic number 1?", {"Hydrogen"}, "Quel élément a le numéro atomique 1 ?", "L'hydrogène", "原子序数为1的元素是什么？", "氢"},
        {"What is the largest mammal?", {"Blue whale"}, "Quel est le plus grand mammifère ?", "La baleine bleue", "最大的哺乳动物是什么？", "蓝鲸"},
        {"In which city is the Statue of Liberty?", {"New York", "New York City"}, "Dans quelle ville se trouve la statue de la Liberté ?", "New York", "自由女神像位于哪个城市？", "纽约"},
        {"Who invented the telephone?", {"Alexander Graham Bell", "Bell"}, "Qui a inventé le téléphone ?", "Alexander Graham Bell", "谁发明了电话？", "亚历山大·格拉汉姆·贝尔"},
        {"What is the main ingredient of guacamole?", {"Avocado"}, "Quel est l'ingrédient principal du guacamole ?", "L'avocat", "牛油果酱的主要原料是什么？", "牛油果"},
        {"How many days are there in a leap year?", {"366"}, "Combien de jours compte une année bissextile ?", "366", "闰年有多少天？", "366"},
        {"Which country gave the Statue of Liberty to the United States?", {"France"}, "Quel pays a offert la statue de la Liberté aux États-Unis ?", "La France", "哪个国家把自由女神像赠送给美国？", "法国"},
        {"What is the capital of Germany?", {"Berlin"}, "Quelle est la capitale de l'Allemagne ?", "Berlin", "德国的首都是哪里？", "柏林"},
        {"Which blood type is known as the universal donor?", {"O negative", "O-"}, "Quel groupe sanguin est appelé donneur universel ?", "O négatif", "哪种血型被称为万能供血者？", "O型阴性"},
        {"What is the square root of 81?", {"9", "nine"}, "Quelle est la racine carrée de 81 ?", "9", "81的平方根是多少？", "9"},
        {"Who is the author of Harry Potter?", {"J. K. Rowling", "Rowling"}, "Qui est l'auteur de Harry Potter ?", "J. K. Rowling", "《哈利·波特》的作者是谁？", "J·K·罗琳"},
        {"What is the largest country by area?", {"Russia"}, "Quel est le plus grand pays du monde par sa superficie ?", "La Russie", "面积最大的国家是哪个？", "俄罗斯"},
        {"Which metal has the chemical symbol Fe?", {"Iron"}, "Quel métal a pour symbole chimique Fe ?", "Le fer", "化学符号为Fe的金属是什么？", "铁"},
        {"Which animal is the symbol of the WWF?", {"Giant panda", "panda"}, "Quel animal est le symbole du WWF ?", "Le panda géant", "世界自然基金会的标志是什么动物？", "大熊猫"},
        {"What is the capital of Kenya?", {"Nairobi"}, "Quelle est la capitale du Kenya ?", "Nairobi", "肯尼亚的首都是哪里？", "内罗毕"},
        {"How many strings does a standard violin have?", {"Four", "4"}, "Combien de cordes possède un violon classique ?", "Quatre", "标准小提琴有几根弦？", "四"},
        {"Which ship sank in 1912 after hitting an iceberg?", {"Titanic", "RMS Titanic"}, "Quel navire a coulé en 1912 après avoir heurté un iceberg ?", "Le Titanic", "哪艘船在1912年撞上冰山后沉没？", "泰坦尼克号"},
        {"What is the fastest land animal?", {"Cheetah"}, "Quel est l'animal terrestre le plus rapide ?", "Le guépard", "陆地上跑得最快的动物是什么？", "猎豹"},
    };
    return r;
}

constexpr std::array<Language, 3> kLanguages = {Language::En, Language::Fr, Language::Zh};

// Probability that the model answers correctly, per language.
double correct_rate(Language l) {
    switch (l) {
        case Language::En: return 0.7;
        case Language::Fr: return 0.6;
        default: return 0.55;
    }
}

QAItem item_for(std::size_t i, Language l) {
    const auto& r = rows()[i];
    QAItem item;
    item.item_id = fmt::format("tqa-{:03d}", i + 1);
    item.language = l;
    switch (l) {
        case Language::En:
            item.question = r.en_q;
            item.gold_answers = r.en_a;
            break;
        case Language::Fr:
            item.question = r.fr_q;
            item.gold_answers = {r.fr_a};
            break;
        default:
            item.question = r.zh_q;
            item.gold_answers = {r.zh_a};
            break;
    }
    return item;
}

// Another item's answer that does not match this item's gold.
std::string wrong_answer(std::size_t i, Language l, std::size_t offset) {
    const auto item = item_for(i, l);
    for (std::size_t k = offset; k < offset + rows().size(); ++k) {
        const auto other = item_for((i + k) % rows().size(), l).gold_answers.front();
        if (!eval::exact_match(other, item.gold_answers, l)) return other;
    }
    return "?";
}

std::vector<std::string> split_tokens(const std::string& s, Language l) {
    std::vector<std::string> out;
    if (uses_character_tokens(l)) {
        for (char32_t cp : text::decode_utf8(s)) out.push_back(text::encode_utf8(std::u32string(1, cp)));
        return out;
    }
    std::string cur;
    for (char c : s) {
        if (c == ' ' && !cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
        cur.push_back(c);
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

double between(SeededRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); }
double round2(double x) { return std::round(x * 100.0) / 100.0; }

std::string prompt_of(const prompts::PromptLibrary& lib, prompts::Purpose p, Language l, const prompts::Vars& vars) {
    backend::GenerationRequest req;
    req.prompt_messages = lib.render(p, l, vars);
    return backend::prompt_text(req);
}

struct RuleSet {
    std::vector<backend::MockScript::Rule> rules;

    void add(std::vector<std::string> needles, backend::ScriptedResponse response) {
        rules.push_back({std::move(needles), {std::move(response)}});
    }

    // Longest needle set first, so an exact full-prompt needle wins over any
    // shorter needle that happens to be a substring of it.
    backend::MockScript build() {
        auto weight = [](const backend::MockScript::Rule& r) {
            std::size_t n = 0;
            for (const auto& s : r.contains) n += s.size();
            return n;
        };
        std::stable_sort(rules.begin(), rules.end(),
                         [&](const auto& a, const auto& b) { return weight(a) > weight(b); });
        backend::MockScript script;
        for (auto& r : rules) script.on_contains(r.contains, r.responses);
        return script;
    }
};

backend::ScriptedResponse plain(std::string text_) {
    backend::ScriptedResponse r;
    r.text = std::move(text_);
    return r;
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixture <output-dir>\n";
        return 2;
    }
    // Translator rules key on the English text alone, so it must be unique.
    std::set<std::string> seen;
    for (const auto& r : rows()) {
        if (!seen.insert(r.en_q).second || !seen.insert(r.en_a.front()).second) {
            std::cerr << "duplicate English text in fixture rows: " << r.en_q << "\n";
            return 1;
        }
    }
    const fs::path out = argv[1];
    fs::create_directories(out);
    const auto lib = prompts::PromptLibrary::defaults();
    SeededRng rng(kSeed);

    std::vector<QAItem> source;
    RuleSet model;
    RuleSet translator_a;
    RuleSet translator_b;

    for (std::size_t i = 0; i < rows().size(); ++i) {
        source.push_back(item_for(i, Language::En));
        // Shared item difficulty makes correctness correlate across languages.
        const double difficulty = rng.uniform01();
        for (Language l : kLanguages) {
            const auto item = item_for(i, l);
            const auto& gold = item.gold_answers.front();
            const bool correct = difficulty + 0.3 * (rng.uniform01() - 0.5) < correct_rate(l);
            const auto answer = correct ? gold : wrong_answer(i, l, 1);
            const std::string& q = item.question;

            auto generation = [&](const std::string& text_, bool right) {
                backend::ScriptedResponse g;
                g.text = text_;
                g.tokens = split_tokens(text_, l);
                for (std::size_t t = 0; t < g.tokens.size(); ++t) {
                    g.probs.push_back(round2(right ? between(rng, 0.6, 0.99) : between(rng, 0.2, 0.9)));
                }
                return g;
            };
            // Later samples and paraphrased questions mostly agree with the
            // first answer when it is right and scatter when it is wrong.
            auto resample = [&](std::size_t k) {
                const bool right = rng.uniform01() < (correct ? 0.8 : 0.3);
                return std::pair{right ? gold : wrong_answer(i, l, 1 + (k + rng.below(3)) % 4), right};
            };
            // Every (question, answer) pair the pipeline can ask verbal-number about.
            std::vector<std::tuple<std::string, std::string, bool>> asked{{q, answer, correct}};

            std::vector<backend::ScriptedResponse> samples{generation(answer, correct)};
            for (std::size_t k = 1; k < kSamples; ++k) {
                const auto [text_, right] = resample(k);
                samples.push_back(generation(text_, right));
                asked.emplace_back(q, text_, right);
            }
            model.rules.push_back({{lib.signature(prompts::Purpose::Answer, l), q}, samples});

            const double p_true = round2(correct ? between(rng, 0.55, 0.97) : between(rng, 0.15, 0.75));
            backend::ScriptedResponse tp;
            const bool says_true = p_true >= 0.5;
            tp.tokens = {"(", says_true ? "A" : "B", ")"};
            tp.text = tp.tokens[0] + tp.tokens[1] + tp.tokens[2];
            tp.probs = {0.99, says_true ? p_true : 1.0 - p_true, 0.99};
            tp.alternatives = {{},
                               says_true ? std::vector<TokenAlternative>{{"A", p_true}, {"B", 1.0 - p_true}}
                                         : std::vector<TokenAlternative>{{"B", 1.0 - p_true}, {"A", p_true}},
                               {}};
            model.add({lib.signature(prompts::Purpose::TrueProbability, l), q}, tp);

            auto vn_reply = [&](bool right) {
                const double vn = round2(right ? between(rng, 0.55, 0.98) : between(rng, 0.15, 0.8));
                // zh replies as a percentage, half the fr replies use a decimal comma.
                std::string t = fmt::format("{:.2f}", vn);
                if (l == Language::Zh) t = fmt::format("{:.0f}%", vn * 100.0);
                if (l == Language::Fr && i % 2 == 0) std::replace(t.begin(), t.end(), '.', ',');
                return plain(t);
            };
            model.add({lib.signature(prompts::Purpose::VerbalNumber, l), q}, vn_reply(correct));

            static constexpr std::array<int, 5> kCorrectWords = {2, 3, 3, 4, 4};
            static constexpr std::array<int, 5> kWrongWords = {0, 1, 1, 2, 3};
            const auto words = prompts::default_confidence_words(l);
            const int wi = (correct ? kCorrectWords : kWrongWords)[rng.below(5)];
            model.add({lib.signature(prompts::Purpose::VerbalWord, l), q}, plain(words[static_cast<std::size_t>(wi)]));

            // Refinement fixes most wrong answers and breaks a few right ones.
            std::string revised;
            if (correct) revised = rng.uniform01() < 0.85 ? gold : wrong_answer(i, l, 2);
            else revised = rng.uniform01() < 0.6 ? gold : answer;
            model.add({lib.signature(prompts::Purpose::Refine, l), q}, plain(revised));

            static const std::map<Language, std::array<std::string, 3>> kFrames = {
                {Language::En, {"Tell me: ", "Quick question: ", "I wonder: "}},
                {Language::Fr, {"Dis-moi : ", "Petite question : ", "Je me demande : "}},
                {Language::Zh, {"请告诉我：", "问一下：", "我想知道："}},
            };
            std::string paraphrases;
            for (std::size_t k = 0; k < kFrames.at(l).size(); ++k) {
                const auto variant = kFrames.at(l)[k] + q;
                paraphrases += variant + "\n";
                const auto [text_, right] = resample(k);
                model.add({lib.signature(prompts::Purpose::Answer, l), variant}, generation(text_, right));
                asked.emplace_back(variant, text_, right);
            }
            model.add({lib.signature(prompts::Purpose::Paraphrase, l), q}, plain(paraphrases));
            asked.emplace_back(q, revised, eval::exact_match(revised, item.gold_answers, l) == 1);

            std::set<std::pair<std::string, std::string>> keyed;
            for (const auto& [question, text_, right] : asked) {
                if (!keyed.emplace(question, text_).second) continue;
                model.add({prompt_of(lib, prompts::Purpose::VerbalNumber, l,
                                     {{"question", question}, {"answer", text_}})},
                          vn_reply(right));
            }

            for (const auto& pred : std::set<std::string>{answer, revised}) {
                const bool ok = eval::exact_match(pred, item.gold_answers, l) == 1;
                const auto verdict = ok ? "Entailment" : (rng.uniform01() < 0.3 ? "Neutral" : "Contradiction");
                model.add({prompt_of(lib, prompts::Purpose::Nli, l,
                                     {{"question", q}, {"gold", gold}, {"prediction", pred}})},
                          plain(verdict));
            }

            if (l == Language::En) continue;
            const auto& en = rows()[i];
            auto translate = [&](const std::string& input) {
                return prompt_of(lib, prompts::Purpose::Translate, l, {{"text", input}});
            };
            translator_a.add({translate(en.en_q)}, plain(q));
            translator_a.add({translate(en.en_a.front())}, plain(gold));
            // The second translator rewords every third question.
            const bool reword = i % 3 == 0;
            const std::string alt_q = reword ? (l == Language::Fr ? "Dites-moi : " + q : "请问" + q) : q;
            translator_b.add({translate(en.en_q)}, plain(alt_q));
            translator_b.add({translate(en.en_a.front())}, plain(gold));
        }
    }

    dataset::save_dataset(source, out / "source.en.jsonl");
    write_json(out / "model_script.json", model.build().to_json());
    write_json(out / "translator_a.json", translator_a.build().to_json());
    write_json(out / "translator_b.json", translator_b.build().to_json());

    const json config = {
        {"backends",
         {{"answer", {{"kind", "mock"}, {"model_id", "mock-answer"}, {"script", "model_script.json"}}},
          {"judge", {{"kind", "mock"}, {"model_id", "mock-judge"}, {"script", "model_script.json"}}},
          {"translator_a", {{"kind", "mock"}, {"model_id", "mock-translator-a"}, {"script", "translator_a.json"}}},
          {"translator_b", {{"kind", "mock"}, {"model_id", "mock-translator-b"}, {"script", "translator_b.json"}}}}},
        {"languages", {"en", "fr", "zh"}},
        {"methods", {"likelihood-min", "likelihood-avg", "likelihood-norm", "true-probability", "verbal-number",
                     "verbal-word"}},
        {"groupings", json::array({"mixed3", {{"name", "en-fr"}, {"mode", "shared"}, {"languages", {"en", "fr"}},
                                              {"pivot", "en"}}})},
        {"aggregate_method", "verbal-number"},
        {"refine_method", "verbal-number"},
        {"baselines", {{"enabled", true}, {"base_method", "verbal-number"}, {"samples", 5}, {"paraphrases", 3}}},
        {"policy", "random:7"},
        {"seed", 7},
        {"concurrency", 4},
        {"generation", {{"temperature", 0.8}, {"max_tokens", 64}}},
        {"dataset", {{"top_n", 2000}, {"review_sample", 50}}},
        {"paths", {{"work_dir", "work"}, {"source", "source.en.jsonl"}}},
    };
    write_json(out / "config.json", config);
    std::cout << "wrote fixture to " << out.string() << "\n";
    return 0;
}
