//! Byte-to-printable-character remapping used by byte-level BPE files.
//!
//! Serialized byte-level vocabularies store every byte as a printable
//! character so that token strings survive JSON round-trips. Printable ASCII
//! and most of Latin-1 map to themselves; the remaining 68 bytes map to
//! codepoints 256..324 (`Ā`, `ā`, ...). The mapping is a bijection, so
//! remapping and unmapping recover the exact source bytes.

use std::collections::HashMap;
use std::sync::LazyLock;

static BYTE_TO_CHAR: LazyLock<[char; 256]> = LazyLock::new(build_table);

static CHAR_TO_BYTE: LazyLock<HashMap<char, u8>> = LazyLock::new(|| {
    BYTE_TO_CHAR
        .iter()
        .enumerate()
        .map(|(b, &c)| (c, b as u8))
        .collect()
});

fn build_table() -> [char; 256] {
    let mut table = ['\0'; 256];
    let mut next_stand_in = 0u32;
    for byte in 0..=255u8 {
        let direct = matches!(byte, b'!'..=b'~' | 0xA1..=0xAC | 0xAE..=0xFF);
        let codepoint = if direct {
            byte as u32
        } else {
            let cp = 256 + next_stand_in;
            next_stand_in += 1;
            cp
        };
        // All codepoints are < 0x400, well inside the valid scalar range.
        table[byte as usize] = char::from_u32(codepoint).unwrap();
    }
    table
}

/// The printable stand-in for a byte.
pub fn byte_to_char(byte: u8) -> char {
    BYTE_TO_CHAR[byte as usize]
}

/// The byte behind a stand-in character, if `c` is one.
pub fn char_to_byte(c: char) -> Option<u8> {
    CHAR_TO_BYTE.get(&c).copied()
}

/// Remap raw bytes to their stand-in string.
pub fn remap(bytes: &[u8]) -> String {
    bytes.iter().map(|&b| byte_to_char(b)).collect()
}

/// All 256 stand-in characters, indexed by byte value.
pub fn alphabet() -> impl Iterator<Item = char> {
    BYTE_TO_CHAR.iter().copied()
}
