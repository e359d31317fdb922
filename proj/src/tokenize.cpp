#include "datagen/tokenize.hpp"

namespace datagen {

std::vector<char32_t> decode_utf8(std::string_view s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        char32_t cp;
        std::size_t len;
        if (c < 0x80) {
            cp = c;
            len = 1;
        } else if ((c >> 5) == 0x6) {
            cp = c & 0x1f;
            len = 2;
        } else if ((c >> 4) == 0xe) {
            cp = c & 0x0f;
            len = 3;
        } else if ((c >> 3) == 0x1e) {
            cp = c & 0x07;
            len = 4;
        } else {
            out.push_back(0xfffd);
            ++i;
            continue;
        }
        if (i + len > s.size()) {
            out.push_back(0xfffd);
            break;
        }
        bool ok = true;
        for (std::size_t k = 1; k < len; ++k) {
            auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc >> 6) != 0x2) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (cc & 0x3f);
        }
        if (!ok) {
            out.push_back(0xfffd);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string encode_utf8(std::u32string_view cps) {
    std::string out;
    for (char32_t cp : cps) {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        } else {
            out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        }
    }
    return out;
}

bool is_unicode_space(char32_t cp) {
    switch (cp) {
    case 0x09:
    case 0x0a:
    case 0x0b:
    case 0x0c:
    case 0x0d:
    case 0x20:
    case 0x85:
    case 0xa0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202f:
    case 0x205f:
    case 0x3000:
        return true;
    default:
        return cp >= 0x2000 && cp <= 0x200a;
    }
}

bool is_punctuation(char32_t cp) {
    if (cp < 0x80)
        return (cp >= 0x21 && cp <= 0x2f) || (cp >= 0x3a && cp <= 0x40) || (cp >= 0x5b && cp <= 0x60) ||
               (cp >= 0x7b && cp <= 0x7e);
    if (cp == 0xa1 || cp == 0xa7 || cp == 0xab || cp == 0xb6 || cp == 0xb7 || cp == 0xbb || cp == 0xbf)
        return true;
    if (cp >= 0x2010 && cp <= 0x2027)
        return true;
    if (cp >= 0x2030 && cp <= 0x205e)
        return true;
    if (cp >= 0x3001 && cp <= 0x3003)
        return true;
    if (cp >= 0x3008 && cp <= 0x3011)
        return true;
    if (cp >= 0x3014 && cp <= 0x301f)
        return true;
    if (cp >= 0xff01 && cp <= 0xff0f)
        return true;
    if (cp >= 0xff1a && cp <= 0xff20)
        return true;
    if (cp >= 0xff3b && cp <= 0xff40)
        return true;
    if (cp >= 0xff5b && cp <= 0xff65)
        return true;
    return false;
}

char32_t simple_lower(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z')
        return cp + 0x20;
    if ((cp >= 0xc0 && cp <= 0xde) && cp != 0xd7)
        return cp + 0x20;
    if (cp >= 0x391 && cp <= 0x3a9 && cp != 0x3a2)
        return cp + 0x20;
    if (cp >= 0x410 && cp <= 0x42f)
        return cp + 0x20;
    if (cp >= 0x400 && cp <= 0x40f)
        return cp + 0x50;
    if (cp >= 0x100 && cp <= 0x17f && cp % 2 == 0 && cp != 0x130 && cp != 0x138)
        return cp + 1;
    return cp;
}

Script script_of(char32_t cp) {
    if ((cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z') || (cp >= 0xc0 && cp <= 0x24f && cp != 0xd7 && cp != 0xf7))
        return Script::latin;
    if ((cp >= 0x4e00 && cp <= 0x9fff) || (cp >= 0x3400 && cp <= 0x4dbf) || (cp >= 0xf900 && cp <= 0xfaff))
        return Script::han;
    if (cp >= 0x3040 && cp <= 0x30ff)
        return Script::kana;
    if (cp >= 0xac00 && cp <= 0xd7af)
        return Script::hangul;
    if (cp >= 0x400 && cp <= 0x4ff)
        return Script::cyrillic;
    if (cp >= 0x370 && cp <= 0x3ff)
        return Script::greek;
    if (cp >= 0x600 && cp <= 0x6ff)
        return Script::arabic;
    return Script::other;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::u32string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(encode_utf8(current));
            current.clear();
        }
    };
    for (char32_t cp : decode_utf8(text)) {
        if (is_unicode_space(cp)) {
            flush();
        } else if (!is_punctuation(cp)) {
            current.push_back(simple_lower(cp));
        }
    }
    flush();
    return tokens;
}

} // namespace datagen
