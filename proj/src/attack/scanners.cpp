#include <cctype>
#include <cstdint>

#include "secgate/attack/attack.hpp"
#include "secgate/core/error.hpp"
#include "secgate/core/text.hpp"

namespace secgate::attack {

namespace {

bool is_b64_char(char c) {
  const auto uc = static_cast<unsigned char>(c);
  return std::isalnum(uc) || c == '+' || c == '/' || c == '-' || c == '_';
}

// Maps the URL-safe alphabet onto the standard one.
std::string normalize_b64(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c == '-') c = '+';
    if (c == '_') c = '/';
  }
  return out;
}

std::optional<LeakFinding> find_encoded(std::string_view response, const std::string& canary) {
  const auto encoded = text::base64_encode(canary);
  if (response.find(encoded) != std::string_view::npos) {
    return LeakFinding{canary, LeakEncoding::Base64, encoded};
  }
  auto unpadded = encoded;
  while (!unpadded.empty() && unpadded.back() == '=') unpadded.pop_back();
  if (!unpadded.empty() && response.find(unpadded) != std::string_view::npos) {
    return LeakFinding{canary, LeakEncoding::Base64, unpadded};
  }

  // any base64-looking run, at every alignment
  std::size_t i = 0;
  while (i < response.size()) {
    if (!is_b64_char(response[i])) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < response.size() && is_b64_char(response[end])) ++end;
    const auto run = response.substr(i, end - i);
    i = end;
    if (run.size() < 4) continue;
    for (std::size_t off = 0; off < 4 && off + 4 <= run.size(); ++off) {
      auto piece = normalize_b64(run.substr(off));
      if (piece.size() % 4 == 1) piece.pop_back();
      const auto decoded = text::base64_decode(piece);
      if (decoded && decoded->find(canary) != std::string::npos) {
        return LeakFinding{canary, LeakEncoding::Base64, std::string(run.substr(off))};
      }
    }
  }
  return std::nullopt;
}

struct Attribute {
  std::string name;  // lowercased
  std::string value;
};

struct Tag {
  std::string name;  // lowercased
  std::vector<Attribute> attributes;
  std::size_t begin = 0, end = 0;  // [begin, end)
};

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f';
}

std::vector<Tag> scan_tags(std::string_view html) {
  std::vector<Tag> tags;
  std::size_t i = 0;
  const std::size_t n = html.size();
  while (i < n) {
    const auto lt = html.find('<', i);
    if (lt == std::string_view::npos || lt + 1 >= n) break;
    const char next = html[lt + 1];
    if (next == '!') {
      const bool comment = html.substr(lt, 4) == "<!--";
      const auto close = comment ? html.find("-->", lt + 4) : html.find('>', lt + 2);
      if (close == std::string_view::npos) break;
      i = close + (comment ? 3 : 1);
      continue;
    }
    if (!std::isalpha(static_cast<unsigned char>(next))) {
      i = lt + 1;  // closing tags and stray '<' carry nothing to flag
      continue;
    }
    Tag tag;
    tag.begin = lt;
    std::size_t p = lt + 1;
    while (p < n && !is_space(html[p]) && html[p] != '>' && html[p] != '/') {
      tag.name += static_cast<char>(std::tolower(static_cast<unsigned char>(html[p])));
      ++p;
    }
    while (p < n && html[p] != '>') {
      if (is_space(html[p]) || html[p] == '/') {
        ++p;
        continue;
      }
      Attribute attr;
      while (p < n && !is_space(html[p]) && html[p] != '=' && html[p] != '>' &&
             !(html[p] == '/' && !attr.name.empty())) {
        attr.name += static_cast<char>(std::tolower(static_cast<unsigned char>(html[p])));
        ++p;
      }
      while (p < n && is_space(html[p])) ++p;
      if (p < n && html[p] == '=') {
        ++p;
        while (p < n && is_space(html[p])) ++p;
        if (p < n && (html[p] == '"' || html[p] == '\'')) {
          const char quote = html[p++];
          const auto close = html.find(quote, p);
          const auto stop = close == std::string_view::npos ? n : close;
          attr.value = std::string(html.substr(p, stop - p));
          p = stop == n ? n : stop + 1;
        } else {
          while (p < n && !is_space(html[p]) && html[p] != '>') attr.value += html[p++];
        }
      }
      if (!attr.name.empty()) tag.attributes.push_back(std::move(attr));
    }
    tag.end = p < n ? p + 1 : n;
    i = tag.end;
    tags.push_back(std::move(tag));
  }
  return tags;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF) return;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Character references as a browser resolves them inside attribute values.
std::string decode_entities(std::string_view s) {
  static const std::pair<std::string_view, char> kNamed[] = {
      {"colon;", ':'}, {"tab;", '\t'},  {"newline;", '\n'}, {"amp;", '&'},
      {"lt;", '<'},    {"gt;", '>'},    {"quot;", '"'},     {"apos;", '\''},
      {"sol;", '/'},   {"lpar;", '('},  {"rpar;", ')'}};
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out += s[i++];
      continue;
    }
    if (i + 2 < s.size() && s[i + 1] == '#') {
      std::size_t p = i + 2;
      const bool hex = p < s.size() && (s[p] == 'x' || s[p] == 'X');
      if (hex) ++p;
      std::uint32_t cp = 0;
      const std::size_t digits_start = p;
      while (p < s.size() && (hex ? std::isxdigit(static_cast<unsigned char>(s[p]))
                                  : std::isdigit(static_cast<unsigned char>(s[p])))) {
        const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s[p])));
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(c <= '9' ? c - '0' : c - 'a' + 10);
        if (cp > 0x10FFFF) cp = 0x110000;
        ++p;
      }
      if (p > digits_start) {
        if (p < s.size() && s[p] == ';') ++p;
        append_utf8(out, cp);
        i = p;
        continue;
      }
    }
    bool matched = false;
    for (const auto& [entity, ch] : kNamed) {
      if (text::to_lower_ascii(s.substr(i + 1, entity.size())) == entity) {
        out += ch;
        i += 1 + entity.size();
        matched = true;
        break;
      }
    }
    if (!matched) out += s[i++];
  }
  return out;
}

bool is_javascript_uri(std::string_view value) {
  std::string compact;
  for (char c : decode_entities(value)) {
    if (static_cast<unsigned char>(c) > 0x20) {
      compact += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  return compact.rfind("javascript:", 0) == 0;
}

}  // namespace

std::vector<LeakFinding> scan_leak(std::string_view response,
                                   const std::vector<std::string>& canaries) {
  std::vector<LeakFinding> findings;
  for (const auto& canary : canaries) {
    if (canary.empty()) continue;
    if (response.find(canary) != std::string_view::npos) {
      findings.push_back({canary, LeakEncoding::Plain, canary});
    } else if (auto f = find_encoded(response, canary)) {
      findings.push_back(std::move(*f));
    }
  }
  return findings;
}

std::string_view rule_id(XssRule r) noexcept {
  switch (r) {
    case XssRule::ScriptElement: return "R1";
    case XssRule::EventHandler: return "R2";
    case XssRule::JavascriptUri: return "R3";
    case XssRule::EmbeddingElement: return "R4";
  }
  return "R?";
}

std::vector<XssFinding> scan_xss(std::string_view html) {
  std::vector<XssFinding> findings;
  for (const auto& tag : scan_tags(html)) {
    const std::string fragment(html.substr(tag.begin, tag.end - tag.begin));
    if (tag.name == "script") findings.push_back({XssRule::ScriptElement, fragment});
    if (tag.name == "iframe" || tag.name == "object" || tag.name == "embed") {
      findings.push_back({XssRule::EmbeddingElement, fragment});
    }
    for (const auto& attr : tag.attributes) {
      if (attr.name.size() > 2 && attr.name.compare(0, 2, "on") == 0) {
        findings.push_back({XssRule::EventHandler, fragment});
      }
      if ((attr.name == "href" || attr.name == "src" || attr.name == "action" ||
           attr.name == "formaction" || attr.name == "xlink:href") &&
          is_javascript_uri(attr.value)) {
        findings.push_back({XssRule::JavascriptUri, fragment});
      }
    }
  }
  return findings;
}

std::string render_xss(std::string_view html_template, std::string_view user_fragment) {
  constexpr std::string_view kPlaceholder = "{}";
  std::size_t count = 0;
  std::size_t at = std::string_view::npos;
  for (auto pos = html_template.find(kPlaceholder); pos != std::string_view::npos;
       pos = html_template.find(kPlaceholder, pos + kPlaceholder.size())) {
    if (count++ == 0) at = pos;
  }
  if (count != 1) {
    throw Error(ErrorCode::PlaceholderCount,
                "template must contain exactly one {} placeholder, found " + std::to_string(count));
  }
  std::string out(html_template.substr(0, at));
  out += user_fragment;
  out += html_template.substr(at + kPlaceholder.size());
  return out;
}

std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace secgate::attack
