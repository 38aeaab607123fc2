#include <viralscope/text.hpp>

#include <algorithm>
#include <cctype>

namespace viralscope {

std::string to_lower_ascii(std::string_view s)
{
    std::string out(s);
    for (auto& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

bool contains_ci(std::string_view haystack, std::string_view needle)
{
    if (needle.empty()) return true;
    const auto it = std::search(
        haystack.begin(), haystack.end(), needle.begin(), needle.end(),
        [](char a, char b) {
            return std::tolower(static_cast<unsigned char>(a)) ==
                   std::tolower(static_cast<unsigned char>(b));
        });
    return it != haystack.end();
}

char32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t& len)
{
    const auto b0 = static_cast<unsigned char>(s[pos]);
    len = 1;
    if (b0 < 0x80) return b0;
    int extra;
    char32_t cp;
    if ((b0 & 0xE0) == 0xC0) {
        extra = 1;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        extra = 2;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        extra = 3;
        cp = b0 & 0x07;
    } else {
        return 0xFFFD;
    }
    if (pos + extra >= s.size()) return 0xFFFD;
    for (int i = 1; i <= extra; ++i) {
        const auto b = static_cast<unsigned char>(s[pos + i]);
        if ((b & 0xC0) != 0x80) return 0xFFFD;
        cp = (cp << 6) | (b & 0x3F);
    }
    len = static_cast<std::size_t>(extra) + 1;
    return cp;
}

bool is_word_codepoint(char32_t cp)
{
    if (cp < 0x80) {
        return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
               (cp >= '0' && cp <= '9') || cp == '_';
    }
    // Non-ASCII: letters of every script count, punctuation and symbols do not.
    if (cp == 0xFFFD) return false;
    if (cp >= 0x0080 && cp <= 0x00BF) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
    if (cp == 0x00D7 || cp == 0x00F7) return false;
    if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, symbols, arrows
    if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
    if (cp >= 0xFE00 && cp <= 0xFE0F) return false;  // variation selectors
    if (cp >= 0xFE30 && cp <= 0xFE6F) return false;
    if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
    if (cp >= 0xFF1A && cp <= 0xFF20) return false;
    if (cp >= 0xFF3B && cp <= 0xFF40) return false;
    if (cp >= 0xFF5B && cp <= 0xFF65) return false;
    if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;  // emoji and pictographs
    if (cp >= 0xE0000 && cp <= 0xE007F) return false;  // tag characters
    return true;
}

std::size_t word_run_length(std::string_view s, std::size_t pos)
{
    std::size_t i = pos;
    while (i < s.size()) {
        std::size_t len;
        const char32_t cp = decode_utf8(s, i, len);
        if (!is_word_codepoint(cp)) break;
        i += len;
    }
    return i - pos;
}

std::vector<std::string> find_marked_tokens(std::string_view text, char mark)
{
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == mark) {
            const std::size_t run = word_run_length(text, i + 1);
            if (run > 0) {
                out.emplace_back(text.substr(i + 1, run));
                i += 1 + run;
                continue;
            }
        }
        ++i;
    }
    return out;
}

std::string strip_urls(std::string_view text)
{
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const std::size_t sep = text.find("://", i);
        if (sep == std::string_view::npos) {
            out.append(text.substr(i));
            break;
        }
        // Walk back over the scheme: [A-Za-z][A-Za-z0-9+.-]*
        std::size_t start = sep;
        while (start > i) {
            const char c = text[start - 1];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '.' || c == '-')
                --start;
            else
                break;
        }
        while (start < sep && !std::isalpha(static_cast<unsigned char>(text[start]))) ++start;
        if (start == sep) {
            out.append(text.substr(i, sep + 3 - i));
            i = sep + 3;
            continue;
        }
        out.append(text.substr(i, start - i));
        std::size_t end = sep + 3;
        while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
        out.push_back(' ');
        i = end;
    }
    return out;
}

} // namespace viralscope
