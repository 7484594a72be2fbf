#include "tsb/stemmer.hpp"

#include <cstring>

// Direct transcription of Porter's 1980 algorithm, operating on lowercase
// ASCII. Words of length <= 2 are returned unchanged.

namespace tsb {

namespace {

struct Stemmer {
    std::string b;
    int k = 0;  // index of last letter
    int j = 0;  // stem boundary set by ends()

    bool cons(int i) const {
        switch (b[static_cast<std::size_t>(i)]) {
            case 'a': case 'e': case 'i': case 'o': case 'u': return false;
            case 'y': return i == 0 ? true : !cons(i - 1);
            default: return true;
        }
    }

    // measure of the stem b[0..j]
    int m() const {
        int n = 0;
        int i = 0;
        while (true) {
            if (i > j) return n;
            if (!cons(i)) break;
            ++i;
        }
        ++i;
        while (true) {
            while (true) {
                if (i > j) return n;
                if (cons(i)) break;
                ++i;
            }
            ++i;
            ++n;
            while (true) {
                if (i > j) return n;
                if (!cons(i)) break;
                ++i;
            }
            ++i;
        }
    }

    bool vowel_in_stem() const {
        for (int i = 0; i <= j; ++i)
            if (!cons(i)) return true;
        return false;
    }

    bool doublec(int i) const {
        if (i < 1) return false;
        if (b[static_cast<std::size_t>(i)] != b[static_cast<std::size_t>(i - 1)]) return false;
        return cons(i);
    }

    bool cvc(int i) const {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
        char ch = b[static_cast<std::size_t>(i)];
        return ch != 'w' && ch != 'x' && ch != 'y';
    }

    char at(int i) const { return b[static_cast<std::size_t>(i)]; }
    void truncate(int new_k) {
        k = new_k;
        b.resize(static_cast<std::size_t>(k + 1));
    }

    bool ends(const char* s) {
        const int len = static_cast<int>(std::strlen(s));
        if (len > k + 1) return false;
        if (b.compare(static_cast<std::size_t>(k + 1 - len), static_cast<std::size_t>(len), s) != 0)
            return false;
        j = k - len;
        return true;
    }

    void setto(const char* s) {
        const int len = static_cast<int>(std::strlen(s));
        b.replace(static_cast<std::size_t>(j + 1), static_cast<std::size_t>(k - j), s);
        k = j + len;
        b.resize(static_cast<std::size_t>(k + 1));
    }

    void r(const char* s) {
        if (m() > 0) setto(s);
    }

    void step1ab() {
        if (at(k) == 's') {
            if (ends("sses")) truncate(k - 2);
            else if (ends("ies")) setto("i");
            else if (at(k - 1) != 's') truncate(k - 1);
        }
        if (ends("eed")) {
            if (m() > 0) truncate(k - 1);
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            truncate(j);
            if (ends("at")) setto("ate");
            else if (ends("bl")) setto("ble");
            else if (ends("iz")) setto("ize");
            else if (doublec(k)) {
                char ch = at(k);
                if (ch != 'l' && ch != 's' && ch != 'z') truncate(k - 1);
            } else {
                j = k;
                if (m() == 1 && cvc(k)) setto("e");
            }
        }
    }

    void step1c() {
        if (ends("y") && vowel_in_stem()) b[static_cast<std::size_t>(k)] = 'i';
    }

    void step2() {
        if (k < 1) return;
        switch (at(k - 1)) {
            case 'a':
                if (ends("ational")) { r("ate"); break; }
                if (ends("tional")) { r("tion"); break; }
                break;
            case 'c':
                if (ends("enci")) { r("ence"); break; }
                if (ends("anci")) { r("ance"); break; }
                break;
            case 'e':
                if (ends("izer")) { r("ize"); break; }
                break;
            case 'l':
                if (ends("abli")) { r("able"); break; }
                if (ends("alli")) { r("al"); break; }
                if (ends("entli")) { r("ent"); break; }
                if (ends("eli")) { r("e"); break; }
                if (ends("ousli")) { r("ous"); break; }
                break;
            case 'o':
                if (ends("ization")) { r("ize"); break; }
                if (ends("ation")) { r("ate"); break; }
                if (ends("ator")) { r("ate"); break; }
                break;
            case 's':
                if (ends("alism")) { r("al"); break; }
                if (ends("iveness")) { r("ive"); break; }
                if (ends("fulness")) { r("ful"); break; }
                if (ends("ousness")) { r("ous"); break; }
                break;
            case 't':
                if (ends("aliti")) { r("al"); break; }
                if (ends("iviti")) { r("ive"); break; }
                if (ends("biliti")) { r("ble"); break; }
                break;
            default:
                break;
        }
    }

    void step3() {
        switch (at(k)) {
            case 'e':
                if (ends("icate")) { r("ic"); break; }
                if (ends("ative")) { r(""); break; }
                if (ends("alize")) { r("al"); break; }
                break;
            case 'i':
                if (ends("iciti")) { r("ic"); break; }
                break;
            case 'l':
                if (ends("ical")) { r("ic"); break; }
                if (ends("ful")) { r(""); break; }
                break;
            case 's':
                if (ends("ness")) { r(""); break; }
                break;
            default:
                break;
        }
    }

    void step4() {
        if (k < 1) return;
        switch (at(k - 1)) {
            case 'a': if (ends("al")) break; return;
            case 'c': if (ends("ance")) break; if (ends("ence")) break; return;
            case 'e': if (ends("er")) break; return;
            case 'i': if (ends("ic")) break; return;
            case 'l': if (ends("able")) break; if (ends("ible")) break; return;
            case 'n':
                if (ends("ant")) break;
                if (ends("ement")) break;
                if (ends("ment")) break;
                if (ends("ent")) break;
                return;
            case 'o':
                if (ends("ion") && j >= 0 && (at(j) == 's' || at(j) == 't')) break;
                if (ends("ou")) break;
                return;
            case 's': if (ends("ism")) break; return;
            case 't': if (ends("ate")) break; if (ends("iti")) break; return;
            case 'u': if (ends("ous")) break; return;
            case 'v': if (ends("ive")) break; return;
            case 'z': if (ends("ize")) break; return;
            default: return;
        }
        if (m() > 1) truncate(j);
    }

    void step5() {
        j = k;
        if (at(k) == 'e') {
            int a = m();
            if (a > 1 || (a == 1 && !cvc(k - 1))) truncate(k - 1);
        }
        if (at(k) == 'l' && doublec(k) && m() > 1) truncate(k - 1);
    }
};

}  // namespace

std::string porter_stem(const std::string& word) {
    if (word.size() <= 2) return word;
    Stemmer s;
    s.b = word;
    s.k = static_cast<int>(word.size()) - 1;
    s.step1ab();
    s.step1c();
    s.step2();
    s.step3();
    s.step4();
    s.step5();
    return s.b;
}

}  // namespace tsb
