//! Double Metaphone phonetic encoding.
//!
//! Follows Lawrence Philips' reference rules (as revised by Kevin Atkinson).
//! Codes are produced at full length; [`double_metaphone_truncated`] applies
//! the customary four-character limit.

/// Code length used by the reference implementation.
pub const REFERENCE_CODE_LEN: usize = 4;

struct Encoder {
    chars: Vec<char>,
    length: isize,
    last: isize,
    slavo_germanic: bool,
    primary: String,
    secondary: String,
}

impl Encoder {
    fn new(input: &str) -> Self {
        let chars: Vec<char> = input.trim().chars().flat_map(char::to_uppercase).collect();
        let length = chars.len() as isize;
        let upper: String = chars.iter().collect();
        let slavo_germanic =
            upper.contains('W') || upper.contains('K') || upper.contains("CZ") || upper.contains("WITZ");
        Encoder {
            chars,
            length,
            last: length - 1,
            slavo_germanic,
            primary: String::new(),
            secondary: String::new(),
        }
    }

    fn at(&self, i: isize) -> char {
        if i < 0 || i >= self.length {
            '\0'
        } else {
            self.chars[i as usize]
        }
    }

    fn string_at(&self, start: isize, patterns: &[&str]) -> bool {
        if start < 0 {
            return false;
        }
        patterns
            .iter()
            .any(|p| p.chars().enumerate().all(|(k, pc)| self.at(start + k as isize) == pc))
    }

    fn is_vowel(&self, i: isize) -> bool {
        matches!(self.at(i), 'A' | 'E' | 'I' | 'O' | 'U' | 'Y')
    }

    fn add(&mut self, code: &str) {
        self.primary.push_str(code);
        self.secondary.push_str(code);
    }

    fn add_alt(&mut self, primary: &str, secondary: &str) {
        self.primary.push_str(primary);
        self.secondary.push_str(secondary);
    }

    fn encode(mut self) -> (String, String) {
        if self.length < 1 {
            return (String::new(), String::new());
        }
        let mut cur: isize = 0;
        if self.string_at(0, &["GN", "KN", "PN", "WR", "PS"]) {
            cur += 1;
        }
        if self.at(0) == 'X' {
            self.add("S");
            cur += 1;
        }
        while cur < self.length {
            cur = match self.at(cur) {
                'A' | 'E' | 'I' | 'O' | 'U' | 'Y' => {
                    if cur == 0 {
                        self.add("A");
                    }
                    cur + 1
                }
                'B' => {
                    self.add("P");
                    if self.at(cur + 1) == 'B' {
                        cur + 2
                    } else {
                        cur + 1
                    }
                }
                'Ç' => {
                    self.add("S");
                    cur + 1
                }
                'C' => self.letter_c(cur),
                'D' => {
                    if self.string_at(cur, &["DG"]) {
                        if self.string_at(cur + 2, &["I", "E", "Y"]) {
                            self.add("J");
                            cur + 3
                        } else {
                            self.add("TK");
                            cur + 2
                        }
                    } else if self.string_at(cur, &["DT", "DD"]) {
                        self.add("T");
                        cur + 2
                    } else {
                        self.add("T");
                        cur + 1
                    }
                }
                'F' => {
                    self.add("F");
                    if self.at(cur + 1) == 'F' {
                        cur + 2
                    } else {
                        cur + 1
                    }
                }
                'G' => self.letter_g(cur),
                'H' => {
                    if (cur == 0 || self.is_vowel(cur - 1)) && self.is_vowel(cur + 1) {
                        self.add("H");
                        cur + 2
                    } else {
                        cur + 1
                    }
                }
                'J' => self.letter_j(cur),
                'K' => {
                    self.add("K");
                    if self.at(cur + 1) == 'K' {
                        cur + 2
                    } else {
                        cur + 1
                    }
                }
                'L' => {
                    if self.at(cur + 1) == 'L' {
                        let spanish = (cur == self.length - 3 && self.string_at(cur - 1, &["ILLO", "ILLA", "ALLE"]))
                            || ((self.string_at(self.last - 1, &["AS", "OS"])
                                || self.string_at(self.last, &["A", "O"]))
                                && self.string_at(cur - 1, &["ALLE"]));
                        if spanish {
                            self.add_alt("L", "");
                        } else {
                            self.add("L");
                        }
                        cur + 2
                    } else {
                        self.add("L");
                        cur + 1
                    }
                }
                'M' => {
                    self.add("M");
                    let dumb =
                        self.string_at(cur - 1, &["UMB"]) && (cur + 1 == self.last || self.string_at(cur + 2, &["ER"]));
                    if dumb || self.at(cur + 1) == 'M' {
                        cur + 2
                    } else {
                        cur + 1
                    }
                }
                'N' => {
                    self.add("N");
                    if self.at(cur + 1) == 'N' {
                        cur + 2
                    } else {
                        cur + 1
                    }
                }
                'Ñ' => {
                    self.add("N");
                    cur + 1
                }
                'P' => {
                    if self.at(cur + 1) == 'H' {
                        self.add("F");
                        cur + 2
                    } else {
                        self.add("P");
                        if self.string_at(cur + 1, &["P", "B"]) {
                            cur + 2
                        } else {
                            cur + 1
                        }
                    }
                }
                'Q' => {
                    self.add("K");
                    if self.at(cur + 1) == 'Q' {
                        cur + 2
                    } else {
                        cur + 1
                    }
                }
                'R' => {
                    if cur == self.last
                        && !self.slavo_germanic
                        && self.string_at(cur - 2, &["IE"])
                        && !self.string_at(cur - 4, &["ME", "MA"])
                    {
                        self.add_alt("", "R");
                    } else {
                        self.add("R");
                    }
                    if self.at(cur + 1) == 'R' {
                        cur + 2
                    } else {
                        cur + 1
                    }
                }
                'S' => self.letter_s(cur),
                'T' => self.letter_t(cur),
                'V' => {
                    self.add("F");
                    if self.at(cur + 1) == 'V' {
                        cur + 2
                    } else {
                        cur + 1
                    }
                }
                'W' => self.letter_w(cur),
                'X' => {
                    let french = cur == self.last
                        && (self.string_at(cur - 3, &["IAU", "EAU"]) || self.string_at(cur - 2, &["AU", "OU"]));
                    if !french {
                        self.add("KS");
                    }
                    if self.string_at(cur + 1, &["C", "X"]) {
                        cur + 2
                    } else {
                        cur + 1
                    }
                }
                'Z' => {
                    if self.at(cur + 1) == 'H' {
                        self.add("J");
                        cur + 2
                    } else {
                        if self.string_at(cur + 1, &["ZO", "ZI", "ZA"])
                            || (self.slavo_germanic && cur > 0 && self.at(cur - 1) != 'T')
                        {
                            self.add_alt("S", "TS");
                        } else {
                            self.add("S");
                        }
                        if self.at(cur + 1) == 'Z' {
                            cur + 2
                        } else {
                            cur + 1
                        }
                    }
                }
                _ => cur + 1,
            };
        }
        (self.primary, self.secondary)
    }

    fn letter_c(&mut self, cur: isize) -> isize {
        // various germanic
        if cur > 1
            && !self.is_vowel(cur - 2)
            && self.string_at(cur - 1, &["ACH"])
            && self.at(cur + 2) != 'I'
            && (self.at(cur + 2) != 'E' || self.string_at(cur - 2, &["BACHER", "MACHER"]))
        {
            self.add("K");
            return cur + 2;
        }
        if cur == 0 && self.string_at(cur, &["CAESAR"]) {
            self.add("S");
            return cur + 2;
        }
        if self.string_at(cur, &["CHIA"]) {
            self.add("K");
            return cur + 2;
        }
        if self.string_at(cur, &["CH"]) {
            if cur > 0 && self.string_at(cur, &["CHAE"]) {
                self.add_alt("K", "X");
                return cur + 2;
            }
            // greek roots, e.g. 'chemistry', 'chorus'
            if cur == 0
                && (self.string_at(cur + 1, &["HARAC", "HARIS"])
                    || self.string_at(cur + 1, &["HOR", "HYM", "HIA", "HEM"]))
                && !self.string_at(0, &["CHORE"])
            {
                self.add("K");
                return cur + 2;
            }
            if self.string_at(0, &["VAN ", "VON ", "SCH"])
                || self.string_at(cur - 2, &["ORCHES", "ARCHIT", "ORCHID"])
                || self.string_at(cur + 2, &["T", "S"])
                || ((self.string_at(cur - 1, &["A", "O", "U", "E"]) || cur == 0)
                    && self.string_at(cur + 2, &["L", "R", "N", "M", "B", "H", "F", "V", "W", " "]))
            {
                self.add("K");
            } else if cur > 0 {
                if self.string_at(0, &["MC"]) {
                    self.add("K");
                } else {
                    self.add_alt("X", "K");
                }
            } else {
                self.add("X");
            }
            return cur + 2;
        }
        // e.g. 'czerny'
        if self.string_at(cur, &["CZ"]) && !self.string_at(cur - 2, &["WICZ"]) {
            self.add_alt("S", "X");
            return cur + 2;
        }
        // e.g. 'focaccia'
        if self.string_at(cur + 1, &["CIA"]) {
            self.add("X");
            return cur + 3;
        }
        // double 'C', but not e.g. 'McClellan'
        if self.string_at(cur, &["CC"]) && !(cur == 1 && self.at(0) == 'M') {
            if self.string_at(cur + 2, &["I", "E", "H"]) && !self.string_at(cur + 2, &["HU"]) {
                if (cur == 1 && self.at(cur - 1) == 'A') || self.string_at(cur - 1, &["UCCEE", "UCCES"]) {
                    self.add("KS");
                } else {
                    self.add("X");
                }
                return cur + 3;
            }
            self.add("K");
            return cur + 2;
        }
        if self.string_at(cur, &["CK", "CG", "CQ"]) {
            self.add("K");
            return cur + 2;
        }
        if self.string_at(cur, &["CI", "CE", "CY"]) {
            if self.string_at(cur, &["CIO", "CIE", "CIA"]) {
                self.add_alt("S", "X");
            } else {
                self.add("S");
            }
            return cur + 2;
        }
        self.add("K");
        if self.string_at(cur + 1, &[" C", " Q", " G"]) {
            cur + 3
        } else if self.string_at(cur + 1, &["C", "K", "Q"]) && !self.string_at(cur + 1, &["CE", "CI"]) {
            cur + 2
        } else {
            cur + 1
        }
    }

    fn letter_g(&mut self, cur: isize) -> isize {
        if self.at(cur + 1) == 'H' {
            if cur > 0 && !self.is_vowel(cur - 1) {
                self.add("K");
                return cur + 2;
            }
            if cur == 0 {
                // 'ghislane', 'ghiradelli'
                if self.at(cur + 2) == 'I' {
                    self.add("J");
                } else {
                    self.add("K");
                }
                return cur + 2;
            }
            // Parker's rule, e.g. 'hugh', 'bough', 'broughton'
            if (cur > 1 && self.string_at(cur - 2, &["B", "H", "D"]))
                || (cur > 2 && self.string_at(cur - 3, &["B", "H", "D"]))
                || (cur > 3 && self.string_at(cur - 4, &["B", "H"]))
            {
                return cur + 2;
            }
            // 'laugh', 'cough', 'rough'
            if cur > 2 && self.at(cur - 1) == 'U' && self.string_at(cur - 3, &["C", "G", "L", "R", "T"]) {
                self.add("F");
            } else if cur > 0 && self.at(cur - 1) != 'I' {
                self.add("K");
            }
            return cur + 2;
        }
        if self.at(cur + 1) == 'N' {
            if cur == 1 && self.is_vowel(0) && !self.slavo_germanic {
                self.add_alt("KN", "N");
            } else if !self.string_at(cur + 2, &["EY"]) && self.at(cur + 1) != 'Y' && !self.slavo_germanic {
                self.add_alt("N", "KN");
            } else {
                self.add("KN");
            }
            return cur + 2;
        }
        // 'tagliaro'
        if self.string_at(cur + 1, &["LI"]) && !self.slavo_germanic {
            self.add_alt("KL", "L");
            return cur + 2;
        }
        // -ges-, -gep-, -gel-, -gie- at beginning
        if cur == 0
            && (self.at(cur + 1) == 'Y'
                || self.string_at(
                    cur + 1,
                    &["ES", "EP", "EB", "EL", "EY", "IB", "IL", "IN", "IE", "EI", "ER"],
                ))
        {
            self.add_alt("K", "J");
            return cur + 2;
        }
        // -ger-, -gy-
        if (self.string_at(cur + 1, &["ER"]) || self.at(cur + 1) == 'Y')
            && !self.string_at(0, &["DANGER", "RANGER", "MANGER"])
            && !self.string_at(cur - 1, &["E", "I"])
            && !self.string_at(cur - 1, &["RGY", "OGY"])
        {
            self.add_alt("K", "J");
            return cur + 2;
        }
        // italian, e.g. 'biaggi'
        if self.string_at(cur + 1, &["E", "I", "Y"]) || self.string_at(cur - 1, &["AGGI", "OGGI"]) {
            if self.string_at(0, &["VAN ", "VON ", "SCH"]) || self.string_at(cur + 1, &["ET"]) {
                self.add("K");
            } else if self.string_at(cur + 1, &["IER "]) {
                self.add("J");
            } else {
                self.add_alt("J", "K");
            }
            return cur + 2;
        }
        self.add("K");
        if self.at(cur + 1) == 'G' {
            cur + 2
        } else {
            cur + 1
        }
    }

    fn letter_j(&mut self, cur: isize) -> isize {
        // obvious spanish, 'jose', 'san jacinto'
        if self.string_at(cur, &["JOSE"]) || self.string_at(0, &["SAN "]) {
            if (cur == 0 && self.at(cur + 4) == ' ') || self.string_at(0, &["SAN "]) {
                self.add("H");
            } else {
                self.add_alt("J", "H");
            }
            return cur + 1;
        }
        if cur == 0 && !self.string_at(cur, &["JOSE"]) {
            self.add_alt("J", "A");
        } else if self.is_vowel(cur - 1) && !self.slavo_germanic && (self.at(cur + 1) == 'A' || self.at(cur + 1) == 'O')
        {
            self.add_alt("J", "H");
        } else if cur == self.last {
            self.add_alt("J", "");
        } else if !self.string_at(cur + 1, &["L", "T", "K", "S", "N", "M", "B", "Z"])
            && !self.string_at(cur - 1, &["S", "K", "L"])
        {
            self.add("J");
        }
        if self.at(cur + 1) == 'J' {
            cur + 2
        } else {
            cur + 1
        }
    }

    fn letter_s(&mut self, cur: isize) -> isize {
        // 'island', 'isle', 'carlisle'
        if self.string_at(cur - 1, &["ISL", "YSL"]) {
            return cur + 1;
        }
        if cur == 0 && self.string_at(cur, &["SUGAR"]) {
            self.add_alt("X", "S");
            return cur + 1;
        }
        if self.string_at(cur, &["SH"]) {
            if self.string_at(cur + 1, &["HEIM", "HOEK", "HOLM", "HOLZ"]) {
                self.add("S");
            } else {
                self.add("X");
            }
            return cur + 2;
        }
        // italian & armenian
        if self.string_at(cur, &["SIO", "SIA"]) || self.string_at(cur, &["SIAN"]) {
            if self.slavo_germanic {
                self.add("S");
            } else {
                self.add_alt("S", "X");
            }
            return cur + 3;
        }
        // 'smith' vs 'schmidt', 'snider' vs 'schneider', slavic -sz-
        if (cur == 0 && self.string_at(cur + 1, &["M", "N", "L", "W"])) || self.string_at(cur + 1, &["Z"]) {
            self.add_alt("S", "X");
            return if self.string_at(cur + 1, &["Z"]) {
                cur + 2
            } else {
                cur + 1
            };
        }
        if self.string_at(cur, &["SC"]) {
            // Schlesinger's rule
            if self.at(cur + 2) == 'H' {
                if self.string_at(cur + 3, &["OO", "ER", "EN", "UY", "ED", "EM"]) {
                    if self.string_at(cur + 3, &["ER", "EN"]) {
                        self.add_alt("X", "SK");
                    } else {
                        self.add("SK");
                    }
                } else if cur == 0 && !self.is_vowel(3) && self.at(3) != 'W' {
                    self.add_alt("X", "S");
                } else {
                    self.add("X");
                }
                return cur + 3;
            }
            if self.string_at(cur + 2, &["I", "E", "Y"]) {
                self.add("S");
            } else {
                self.add("SK");
            }
            return cur + 3;
        }
        // french, e.g. 'resnais', 'artois'
        if cur == self.last && self.string_at(cur - 2, &["AI", "OI"]) {
            self.add_alt("", "S");
        } else {
            self.add("S");
        }
        if self.string_at(cur + 1, &["S", "Z"]) {
            cur + 2
        } else {
            cur + 1
        }
    }

    fn letter_t(&mut self, cur: isize) -> isize {
        if self.string_at(cur, &["TION"]) || self.string_at(cur, &["TIA", "TCH"]) {
            self.add("X");
            return cur + 3;
        }
        if self.string_at(cur, &["TH"]) || self.string_at(cur, &["TTH"]) {
            // 'thomas', 'thames' or germanic
            if self.string_at(cur + 2, &["OM", "AM"]) || self.string_at(0, &["VAN ", "VON ", "SCH"]) {
                self.add("T");
            } else {
                self.add_alt("0", "T");
            }
            return cur + 2;
        }
        self.add("T");
        if self.string_at(cur + 1, &["T", "D"]) {
            cur + 2
        } else {
            cur + 1
        }
    }

    fn letter_w(&mut self, cur: isize) -> isize {
        if self.string_at(cur, &["WR"]) {
            self.add("R");
            return cur + 2;
        }
        if cur == 0 && (self.is_vowel(cur + 1) || self.string_at(cur, &["WH"])) {
            // Wasserman should match Vasserman
            if self.is_vowel(cur + 1) {
                self.add_alt("A", "F");
            } else {
                self.add("A");
            }
        }
        // Arnow should match Arnoff
        if (cur == self.last && self.is_vowel(cur - 1))
            || self.string_at(cur - 1, &["EWSKI", "EWSKY", "OWSKI", "OWSKY"])
            || self.string_at(0, &["SCH"])
        {
            self.add_alt("", "F");
            return cur + 1;
        }
        // polish, e.g. 'filipowicz'
        if self.string_at(cur, &["WICZ", "WITZ"]) {
            self.add_alt("TS", "FX");
            return cur + 4;
        }
        cur + 1
    }
}

/// Primary and secondary Double Metaphone codes at full length. The
/// secondary code is empty when it equals the primary.
pub fn double_metaphone(input: &str) -> (String, String) {
    let (primary, secondary) = Encoder::new(input).encode();
    if primary == secondary {
        (primary, String::new())
    } else {
        (primary, secondary)
    }
}

/// Double Metaphone codes cut to `max_len` characters.
pub fn double_metaphone_truncated(input: &str, max_len: usize) -> (String, String) {
    let (p, s) = double_metaphone(input);
    let cut = |c: String| c.chars().take(max_len).collect::<String>();
    let (p, s) = (cut(p), cut(s));
    if p == s {
        (p, String::new())
    } else {
        (p, s)
    }
}

/// Primary code only, full length.
pub fn phonetic_primary(token: &str) -> String {
    double_metaphone(token).0
}
