#include "mlconf/prompts.hpp"

#include "mlconf/error.hpp"
#include "mlconf/text.hpp"
#include "mlconf/util.hpp"

namespace mlconf::prompts {

namespace {

struct Exemplar {
    std::string_view question;
    std::string_view answer;
};

// Per-language phrase table the default templates are assembled from.
struct Phrases {
    std::string_view answer_instruction;
    std::array<Exemplar, 5> exemplars;
    std::string_view question_label;
    std::string_view answer_label;
    std::string_view proposed_label;
    std::string_view true_prob_ask;
    std::string_view true_prob_tail;
    std::string_view verbal_number_instruction;
    std::string_view verbal_word_instruction;
    std::string_view nli_instruction;
    std::string_view gold_label;
    std::string_view prediction_label;
    std::string_view refine_previous_label;
    std::string_view refine_confidence_label;
    std::string_view refine_instruction;
    std::string_view paraphrase_instruction;
};

const Phrases& phrases(Language lang) {
    static const std::array<Phrases, 10> table = {{
        // en
        {"Answer the following trivia question. Reply with a short answer only.",
         {{{"What is the capital city of France?", "Paris"},
           {"Which planet is known as the Red Planet?", "Mars"},
           {"Who wrote the play Romeo and Juliet?", "William Shakespeare"},
           {"What is the chemical symbol for gold?", "Au"},
           {"How many continents are there on Earth?", "Seven"}}},
         "Question", "Answer", "Proposed answer",
         "Is the proposed answer:", "The proposed answer is:",
         "Give the probability, between 0.0 and 1.0, that the answer is correct. Reply with the probability only, for example 0.7.",
         "How confident are you that the answer is correct? Choose exactly one word from: {words}. Reply with that word only.",
         "Decide whether the predicted answer means the same as the reference answer for this question. Reply with exactly one word: Entailment, Neutral, or Contradiction.",
         "Reference answer", "Predicted answer",
         "Your previous answer", "Your confidence in that answer (0 to 1)",
         "Taking this confidence into account, check the answer and correct or improve it if needed. Reply with the final short answer only.",
         "Rewrite the following question in {count} different ways without changing its meaning. Write one question per line and nothing else."},
        // it
        {"Rispondi alla seguente domanda di cultura generale. Rispondi solo con una risposta breve.",
         {{{"Qual è la capitale della Francia?", "Parigi"},
           {"Quale pianeta è noto come il Pianeta Rosso?", "Marte"},
           {"Chi ha scritto l'opera Romeo e Giulietta?", "William Shakespeare"},
           {"Qual è il simbolo chimico dell'oro?", "Au"},
           {"Quanti continenti ci sono sulla Terra?", "Sette"}}},
         "Domanda", "Risposta", "Risposta proposta",
         "La risposta proposta è corretta?", "Risposta:",
         "Indica la probabilità, tra 0.0 e 1.0, che la risposta sia corretta. Rispondi solo con la probabilità, per esempio 0.7.",
         "Quanto sei sicuro che la risposta sia corretta? Scegli esattamente una parola tra: {words}. Rispondi solo con quella parola.",
         "Stabilisci se la risposta prevista ha lo stesso significato della risposta di riferimento per questa domanda. Rispondi con una sola parola: Entailment, Neutral oppure Contradiction.",
         "Risposta di riferimento", "Risposta prevista",
         "La tua risposta precedente", "La tua fiducia in quella risposta (da 0 a 1)",
         "Tenendo conto di questa fiducia, verifica la risposta e correggila o migliorala se necessario. Rispondi solo con la risposta finale breve.",
         "Riscrivi la seguente domanda in {count} modi diversi senza cambiarne il significato. Scrivi una domanda per riga e nient'altro."},
        // id
        {"Jawablah pertanyaan pengetahuan umum berikut. Balas hanya dengan jawaban singkat.",
         {{{"Apa ibu kota Prancis?", "Paris"},
           {"Planet apa yang dikenal sebagai Planet Merah?", "Mars"},
           {"Siapa yang menulis drama Romeo dan Juliet?", "William Shakespeare"},
           {"Apa simbol kimia untuk emas?", "Au"},
           {"Ada berapa benua di Bumi?", "Tujuh"}}},
         "Pertanyaan", "Jawaban", "Jawaban yang diusulkan",
         "Apakah jawaban yang diusulkan:", "Jawaban yang diusulkan adalah:",
         "Berikan probabilitas, antara 0.0 dan 1.0, bahwa jawaban tersebut benar. Balas hanya dengan probabilitasnya, misalnya 0.7.",
         "Seberapa yakin Anda bahwa jawaban tersebut benar? Pilih tepat satu kata dari: {words}. Balas hanya dengan kata itu.",
         "Tentukan apakah jawaban prediksi memiliki arti yang sama dengan jawaban acuan untuk pertanyaan ini. Balas dengan tepat satu kata: Entailment, Neutral, atau Contradiction.",
         "Jawaban acuan", "Jawaban prediksi",
         "Jawaban Anda sebelumnya", "Tingkat keyakinan Anda terhadap jawaban itu (0 sampai 1)",
         "Dengan mempertimbangkan tingkat keyakinan ini, periksa jawaban tersebut dan perbaiki atau sempurnakan bila perlu. Balas hanya dengan jawaban akhir yang singkat.",
         "Tulis ulang pertanyaan berikut dengan {count} cara berbeda tanpa mengubah maknanya. Tulis satu pertanyaan per baris dan tidak ada yang lain."},
        // fr
        {"Réponds à la question de culture générale suivante. Donne uniquement une réponse courte.",
         {{{"Quelle est la capitale de la France ?", "Paris"},
           {"Quelle planète est surnommée la planète rouge ?", "Mars"},
           {"Qui a écrit la pièce Roméo et Juliette ?", "William Shakespeare"},
           {"Quel est le symbole chimique de l'or ?", "Au"},
           {"Combien y a-t-il de continents sur Terre ?", "Sept"}}},
         "Question", "Réponse", "Réponse proposée",
         "La réponse proposée est-elle :", "La réponse proposée est :",
         "Indique la probabilité, entre 0.0 et 1.0, que la réponse soit correcte. Réponds uniquement par cette probabilité, par exemple 0.7.",
         "À quel point es-tu sûr que la réponse est correcte ? Choisis exactement un terme parmi : {words}. Réponds uniquement par ce terme.",
         "Détermine si la réponse prédite a le même sens que la réponse de référence pour cette question. Réponds par un seul mot : Entailment, Neutral ou Contradiction.",
         "Réponse de référence", "Réponse prédite",
         "Ta réponse précédente", "Ta confiance dans cette réponse (de 0 à 1)",
         "En tenant compte de cette confiance, vérifie la réponse et corrige-la ou améliore-la si nécessaire. Donne uniquement la réponse finale courte.",
         "Reformule la question suivante de {count} façons différentes sans en changer le sens. Écris une question par ligne et rien d'autre."},
        // de
        {"Beantworte die folgende Quizfrage. Antworte nur mit einer kurzen Antwort.",
         {{{"Was ist die Hauptstadt von Frankreich?", "Paris"},
           {"Welcher Planet ist als der Rote Planet bekannt?", "Mars"},
           {"Wer schrieb das Theaterstück Romeo und Julia?", "William Shakespeare"},
           {"Was ist das chemische Symbol für Gold?", "Au"},
           {"Wie viele Kontinente gibt es auf der Erde?", "Sieben"}}},
         "Frage", "Antwort", "Vorgeschlagene Antwort",
         "Ist die vorgeschlagene Antwort:", "Die vorgeschlagene Antwort ist:",
         "Gib die Wahrscheinlichkeit zwischen 0.0 und 1.0 an, dass die Antwort richtig ist. Antworte nur mit der Wahrscheinlichkeit, zum Beispiel 0.7.",
         "Wie sicher bist du, dass die Antwort richtig ist? Wähle genau ein Wort aus: {words}. Antworte nur mit diesem Wort.",
         "Entscheide, ob die vorhergesagte Antwort für diese Frage dieselbe Bedeutung hat wie die Referenzantwort. Antworte mit genau einem Wort: Entailment, Neutral oder Contradiction.",
         "Referenzantwort", "Vorhergesagte Antwort",
         "Deine vorherige Antwort", "Deine Zuversicht in diese Antwort (0 bis 1)",
         "Überprüfe die Antwort unter Berücksichtigung dieser Zuversicht und korrigiere oder verbessere sie bei Bedarf. Antworte nur mit der endgültigen kurzen Antwort.",
         "Formuliere die folgende Frage auf {count} verschiedene Arten um, ohne ihre Bedeutung zu ändern. Schreibe eine Frage pro Zeile und sonst nichts."},
        // zh
        {"请回答下面的常识问题。只需给出简短的答案。",
         {{{"法国的首都是哪座城市？", "巴黎"},
           {"哪颗行星被称为红色星球？", "火星"},
           {"谁创作了戏剧《罗密欧与朱丽叶》？", "威廉·莎士比亚"},
           {"金的化学符号是什么？", "Au"},
           {"地球上有几个大洲？", "七个"}}},
         "问题", "答案", "提议的答案",
         "提议的答案是否正确？", "答案：",
         "请给出该答案正确的概率（0.0 到 1.0 之间）。只回复概率，例如 0.7。",
         "你有多确定该答案是正确的？请从以下词语中恰好选择一个：{words}。只回复该词语。",
         "请判断对于这个问题，预测答案与参考答案的含义是否相同。只用一个词回复：Entailment、Neutral 或 Contradiction。",
         "参考答案", "预测答案",
         "你之前的答案", "你对该答案的置信度（0 到 1）",
         "请结合这个置信度检查该答案，如有需要请修正或改进。只回复最终的简短答案。",
         "请用 {count} 种不同的方式改写下面的问题，不要改变其含义。每行写一个问题，不要写其他内容。"},
        // ja
        {"次の雑学クイズに答えてください。短い答えだけを返してください。",
         {{{"フランスの首都はどこですか？", "パリ"},
           {"赤い惑星として知られている惑星はどれですか？", "火星"},
           {"戯曲『ロミオとジュリエット』を書いたのは誰ですか？", "ウィリアム・シェイクスピア"},
           {"金の元素記号は何ですか？", "Au"},
           {"地球にはいくつの大陸がありますか？", "七つ"}}},
         "質問", "答え", "提案された答え",
         "提案された答えは正しいですか？", "回答：",
         "その答えが正しい確率を 0.0 から 1.0 の間で示してください。確率だけを返してください。例：0.7",
         "その答えが正しいとどの程度確信していますか？次の中から一つだけ選んでください：{words}。その言葉だけを返してください。",
         "この質問について、予測された答えが参照答えと同じ意味かどうかを判断してください。Entailment、Neutral、Contradiction のいずれか一語で答えてください。",
         "参照答え", "予測された答え",
         "あなたの以前の答え", "その答えへのあなたの確信度（0〜1）",
         "この確信度を踏まえて答えを見直し、必要なら修正または改善してください。最終的な短い答えだけを返してください。",
         "次の質問を、意味を変えずに {count} 通りの異なる言い方に書き換えてください。1行に1つの質問だけを書いてください。"},
        // ar
        {"أجب عن سؤال المعلومات العامة التالي. اكتب إجابة قصيرة فقط.",
         {{{"ما هي عاصمة فرنسا؟", "باريس"},
           {"ما الكوكب المعروف بالكوكب الأحمر؟", "المريخ"},
           {"من كتب مسرحية روميو وجولييت؟", "ويليام شكسبير"},
           {"ما الرمز الكيميائي للذهب؟", "Au"},
           {"كم عدد القارات على الأرض؟", "سبع"}}},
         "السؤال", "الإجابة", "الإجابة المقترحة",
         "هل الإجابة المقترحة:", "الإجابة المقترحة هي:",
         "اذكر احتمال أن تكون الإجابة صحيحة، بين 0.0 و1.0. اكتب الاحتمال فقط، مثل 0.7.",
         "ما مدى ثقتك في أن الإجابة صحيحة؟ اختر كلمة واحدة فقط من: {words}. اكتب تلك الكلمة فقط.",
         "حدد ما إذا كانت الإجابة المتوقعة تحمل نفس معنى الإجابة المرجعية لهذا السؤال. أجب بكلمة واحدة فقط: Entailment أو Neutral أو Contradiction.",
         "الإجابة المرجعية", "الإجابة المتوقعة",
         "إجابتك السابقة", "درجة ثقتك في تلك الإجابة (من 0 إلى 1)",
         "مع مراعاة درجة الثقة هذه، راجع الإجابة وصححها أو حسّنها إذا لزم الأمر. اكتب الإجابة النهائية القصيرة فقط.",
         "أعد صياغة السؤال التالي بـ {count} طرق مختلفة دون تغيير معناه. اكتب سؤالاً واحدًا في كل سطر ولا شيء غير ذلك."},
        // ko
        {"다음 상식 퀴즈에 답하세요. 짧은 답만 작성하세요.",
         {{{"프랑스의 수도는 어디입니까?", "파리"},
           {"붉은 행성으로 알려진 행성은 무엇입니까?", "화성"},
           {"희곡 로미오와 줄리엣을 쓴 사람은 누구입니까?", "윌리엄 셰익스피어"},
           {"금의 화학 기호는 무엇입니까?", "Au"},
           {"지구에는 몇 개의 대륙이 있습니까?", "일곱 개"}}},
         "질문", "답변", "제안된 답변",
         "제안된 답변이 맞습니까?", "답:",
         "답변이 맞을 확률을 0.0에서 1.0 사이로 제시하세요. 확률만 답하세요. 예: 0.7",
         "답변이 맞다고 얼마나 확신합니까? 다음 중 정확히 한 단어를 고르세요: {words}. 그 단어만 답하세요.",
         "이 질문에 대해 예측 답변이 참조 답변과 같은 의미인지 판단하세요. Entailment, Neutral, Contradiction 중 한 단어로만 답하세요.",
         "참조 답변", "예측 답변",
         "이전 답변", "그 답변에 대한 확신도 (0에서 1)",
         "이 확신도를 고려하여 답변을 검토하고 필요하면 수정하거나 개선하세요. 최종 짧은 답변만 작성하세요.",
         "다음 질문을 의미를 바꾸지 않고 {count}가지 다른 방식으로 바꿔 쓰세요. 한 줄에 질문 하나만 쓰고 다른 내용은 쓰지 마세요."},
        // th
        {"ตอบคำถามความรู้ทั่วไปต่อไปนี้ ตอบเพียงคำตอบสั้น ๆ เท่านั้น",
         {{{"เมืองหลวงของฝรั่งเศสคือเมืองอะไร", "ปารีส"},
           {"ดาวเคราะห์ดวงใดที่ได้ชื่อว่าเป็นดาวเคราะห์สีแดง", "ดาวอังคาร"},
           {"ใครเป็นผู้เขียนบทละครเรื่องโรมิโอและจูเลียต", "วิลเลียม เชกสเปียร์"},
           {"สัญลักษณ์ทางเคมีของทองคำคืออะไร", "Au"},
           {"โลกมีทวีปทั้งหมดกี่ทวีป", "เจ็ด"}}},
         "คำถาม", "คำตอบ", "คำตอบที่เสนอ",
         "คำตอบที่เสนอนั้น:", "คำตอบที่เสนอคือ:",
         "ระบุความน่าจะเป็นระหว่าง 0.0 ถึง 1.0 ที่คำตอบนี้ถูกต้อง ตอบเพียงค่าความน่าจะเป็นเท่านั้น เช่น 0.7",
         "คุณมั่นใจเพียงใดว่าคำตอบนี้ถูกต้อง เลือกหนึ่งคำจาก: {words} ตอบเพียงคำนั้นเท่านั้น",
         "พิจารณาว่าคำตอบที่ทำนายมีความหมายเดียวกับคำตอบอ้างอิงสำหรับคำถามนี้หรือไม่ ตอบด้วยคำเดียวเท่านั้น: Entailment, Neutral หรือ Contradiction",
         "คำตอบอ้างอิง", "คำตอบที่ทำนาย",
         "คำตอบก่อนหน้าของคุณ", "ความมั่นใจของคุณต่อคำตอบนั้น (0 ถึง 1)",
         "โดยคำนึงถึงความมั่นใจนี้ ให้ตรวจสอบคำตอบและแก้ไขหรือปรับปรุงหากจำเป็น ตอบเพียงคำตอบสุดท้ายที่สั้นเท่านั้น",
         "เขียนคำถามต่อไปนี้ใหม่ {count} แบบโดยไม่เปลี่ยนความหมาย เขียนหนึ่งคำถามต่อบรรทัดและไม่ต้องเขียนอย่างอื่น"},
    }};
    return table[static_cast<std::size_t>(lang)];
}

std::string cat(std::initializer_list<std::string_view> parts) {
    std::string out;
    for (auto p : parts) out += p;
    return out;
}

std::string build_default(Purpose purpose, Language lang) {
    const Phrases& p = phrases(lang);
    const auto q = cat({p.question_label, ": {question}\n"});
    switch (purpose) {
        case Purpose::Answer: {
            std::string t = cat({"[system]\n", p.answer_instruction, "\n"});
            for (const auto& ex : p.exemplars) {
                t += cat({"[user]\n", ex.question, "\n[assistant]\n", ex.answer, "\n"});
            }
            t += "[user]\n{question}\n";
            return t;
        }
        case Purpose::TrueProbability: {
            const auto& c = default_choice_words(lang);
            return cat({"[user]\n", q, p.proposed_label, ": {answer}\n", p.true_prob_ask, "\n (A) ",
                        c.true_word, "\n (B) ", c.false_word, "\n", p.true_prob_tail, "\n"});
        }
        case Purpose::VerbalNumber:
            return cat({"[system]\n", p.verbal_number_instruction, "\n[user]\n", q, p.answer_label,
                        ": {answer}\n"});
        case Purpose::VerbalWord:
            return cat({"[system]\n", p.verbal_word_instruction, "\n[user]\n", q, p.answer_label,
                        ": {answer}\n"});
        case Purpose::Nli:
            return cat({"[system]\n", p.nli_instruction, "\n[user]\n", q, p.gold_label, ": {gold}\n",
                        p.prediction_label, ": {prediction}\n"});
        case Purpose::Refine:
            return cat({"[system]\n", p.refine_instruction, "\n[user]\n", q, p.refine_previous_label,
                        ": {answer}\n", p.refine_confidence_label, ": {confidence}\n"});
        case Purpose::Translate:
            return cat({"[system]\nTranslate the user's text from English into ", english_name(lang),
                        ". Reply with the translation only.\n[user]\n{text}\n"});
        case Purpose::Paraphrase:
            return cat({"[system]\n", p.paraphrase_instruction, "\n[user]\n{question}\n"});
    }
    return {};
}

struct PurposeName {
    Purpose purpose;
    std::string_view name;
};

constexpr std::array<PurposeName, 8> kPurposeNames = {{
    {Purpose::Answer, "answer"},
    {Purpose::TrueProbability, "true_probability"},
    {Purpose::VerbalNumber, "verbal_number"},
    {Purpose::VerbalWord, "verbal_word"},
    {Purpose::Nli, "nli"},
    {Purpose::Refine, "refine"},
    {Purpose::Translate, "translate"},
    {Purpose::Paraphrase, "paraphrase"},
}};

std::optional<backend::Role> section_marker(std::string_view line) {
    const auto t = text::trim(line);
    if (t == "[system]") return backend::Role::System;
    if (t == "[user]") return backend::Role::User;
    if (t == "[assistant]") return backend::Role::Assistant;
    return std::nullopt;
}

std::string strip_newlines(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && (s[b] == '\n' || s[b] == '\r')) ++b;
    return s.substr(b);
}

}  // namespace

std::string_view to_string(Purpose purpose) {
    for (const auto& p : kPurposeNames) {
        if (p.purpose == purpose) return p.name;
    }
    return "?";
}

Purpose parse_purpose(std::string_view name) {
    for (const auto& p : kPurposeNames) {
        if (p.name == name) return p.purpose;
    }
    throw InvalidArgument("unknown prompt purpose '" + std::string(name) + "'");
}

const std::array<std::string, 5>& default_confidence_words(Language lang) {
    static const std::array<std::array<std::string, 5>, 10> table = {{
        {"lowest", "low", "medium", "high", "highest"},
        {"la più bassa", "bassa", "media", "alta", "la più alta"},
        {"terendah", "rendah", "sedang", "tinggi", "tertinggi"},
        {"la plus basse", "basse", "moyenne", "haute", "la plus haute"},
        {"am niedrigsten", "niedrig", "mittel", "hoch", "am höchsten"},
        {"最低", "低", "中等", "高", "最高"},
        {"最低", "低い", "中程度", "高い", "最高"},
        {"الأدنى", "منخفضة", "متوسطة", "مرتفعة", "الأعلى"},
        {"가장 낮음", "낮음", "보통", "높음", "가장 높음"},
        {"ต่ำที่สุด", "ต่ำ", "ปานกลาง", "สูง", "สูงที่สุด"},
    }};
    return table[static_cast<std::size_t>(lang)];
}

const ChoiceWords& default_choice_words(Language lang) {
    static const std::array<ChoiceWords, 10> table = {{
        {"True", "False"},
        {"Vera", "Falsa"},
        {"Benar", "Salah"},
        {"Vraie", "Fausse"},
        {"Wahr", "Falsch"},
        {"正确", "错误"},
        {"正しい", "誤り"},
        {"صحيحة", "خاطئة"},
        {"참", "거짓"},
        {"จริง", "เท็จ"},
    }};
    return table[static_cast<std::size_t>(lang)];
}

std::vector<backend::Message> parse_template(std::string_view t) {
    std::vector<backend::Message> out;
    std::optional<backend::Role> role;
    std::string body;
    const auto flush = [&] {
        if (role) out.push_back({*role, strip_newlines(body)});
        body.clear();
    };
    for (const auto& line : text::split_lines(t)) {
        if (auto marker = section_marker(line)) {
            flush();
            role = marker;
            continue;
        }
        if (!role) {
            if (text::trim(line).empty()) continue;
            role = backend::Role::User;  // unmarked text is a single user message
        }
        body += line;
        body += '\n';
    }
    flush();
    if (out.empty()) throw InvalidArgument("prompt template has no messages");
    return out;
}

std::string substitute(std::string_view t, const Vars& vars) {
    std::string out;
    out.reserve(t.size());
    std::size_t i = 0;
    while (i < t.size()) {
        if (t[i] == '{') {
            const auto close = t.find('}', i + 1);
            if (close != std::string_view::npos) {
                const auto name = t.substr(i + 1, close - i - 1);
                if (auto it = vars.find(name); it != vars.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(t[i]);
        ++i;
    }
    return out;
}

PromptLibrary PromptLibrary::defaults() {
    PromptLibrary lib;
    for (Purpose p : kAllPurposes) {
        for (Language l : kAllLanguages) lib.templates_[{p, l}] = build_default(p, l);
    }
    return lib;
}

std::size_t PromptLibrary::load_overrides(const std::filesystem::path& dir) {
    std::size_t loaded = 0;
    for (Purpose p : kAllPurposes) {
        for (Language l : kAllLanguages) {
            const auto path = dir / (std::string(to_string(p)) + "." + std::string(to_code(l)) + ".txt");
            if (std::filesystem::exists(path)) {
                set(p, l, read_file(path));
                ++loaded;
            }
        }
    }
    return loaded;
}

void PromptLibrary::export_to(const std::filesystem::path& dir) const {
    for (const auto& [key, body] : templates_) {
        const auto path =
            dir / (std::string(to_string(key.first)) + "." + std::string(to_code(key.second)) + ".txt");
        write_file_atomic(path, body);
    }
}

const std::string& PromptLibrary::raw(Purpose purpose, Language lang) const {
    auto it = templates_.find({purpose, lang});
    if (it == templates_.end()) {
        throw ConfigError("no prompt template for " + std::string(to_string(purpose)) + "." +
                          std::string(to_code(lang)));
    }
    return it->second;
}

void PromptLibrary::set(Purpose purpose, Language lang, std::string body) {
    auto messages = parse_template(body);
    if (messages.back().role != backend::Role::User) {
        throw InvalidArgument("prompt template must end with a [user] section");
    }
    templates_[{purpose, lang}] = std::move(body);
}

std::vector<backend::Message> PromptLibrary::render(Purpose purpose, Language lang, const Vars& vars) const {
    auto messages = parse_template(raw(purpose, lang));
    for (auto& m : messages) m.text = substitute(m.text, vars);
    return messages;
}

std::string PromptLibrary::signature(Purpose purpose, Language lang) const {
    std::string best;
    for (const auto& line : text::split_lines(raw(purpose, lang))) {
        if (section_marker(line)) continue;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            auto open = line.find('{', pos);
            if (open == std::string::npos) open = line.size();
            auto segment = text::trim(std::string_view(line).substr(pos, open - pos));
            if (segment.size() > best.size()) best = std::move(segment);
            const auto close = line.find('}', open);
            if (close == std::string::npos) break;
            pos = close + 1;
        }
    }
    return best;
}

}  // namespace mlconf::prompts
