//! Format-preserving letter transformation: modular addition of a keystream
//! byte within the 95-symbol printable alphabet. A raw XOR could leave the
//! valid keycode space; the ring keeps ciphertext typeable.

use crate::error::{Error, Result};
use crate::input::{PRINTABLE_COUNT, PRINTABLE_MAX, PRINTABLE_MIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Encrypt,
    Decrypt,
}

/// Encrypt: 32 + ((c - 32 + ks) mod 95). Decrypt: 32 + ((c - 32 - ks) mod 95).
pub fn ring_map(code: u8, ks: u8, direction: Direction) -> Result<u8> {
    if !(PRINTABLE_MIN..=PRINTABLE_MAX).contains(&code) {
        return Err(Error::NotPrintable(code as u32));
    }
    let offset = (code - PRINTABLE_MIN) as i32;
    let shift = ks as i32;
    let modulus = PRINTABLE_COUNT as i32;
    let mapped = match direction {
        Direction::Encrypt => (offset + shift).rem_euclid(modulus),
        Direction::Decrypt => (offset - shift).rem_euclid(modulus),
    };
    Ok(PRINTABLE_MIN + mapped as u8)
}

pub fn encrypt(code: u8, ks: u8) -> Result<u8> {
    ring_map(code, ks, Direction::Encrypt)
}

pub fn decrypt(code: u8, ks: u8) -> Result<u8> {
    ring_map(code, ks, Direction::Decrypt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig4_letter_transformation() {
        // 'k' under a keystream residue of 6 displays as 'q'
        assert_eq!(encrypt(b'k', 6).unwrap(), b'q');
        assert_eq!(decrypt(b'q', 6).unwrap(), b'k');
    }

    #[test]
    fn zero_keystream_is_identity() {
        for c in PRINTABLE_MIN..=PRINTABLE_MAX {
            assert_eq!(encrypt(c, 0).unwrap(), c);
        }
    }

    #[test]
    fn wraps_at_alphabet_end() {
        // (126 - 32 + 1) mod 95 == 0 -> ' '
        assert_eq!(encrypt(b'~', 1).unwrap(), b' ');
        assert_eq!(decrypt(b' ', 1).unwrap(), b'~');
    }

    #[test]
    fn rejects_non_printable() {
        assert!(matches!(encrypt(31, 5), Err(Error::NotPrintable(31))));
        assert!(decrypt(127, 5).is_err());
    }

    #[test]
    fn ciphertext_stays_printable() {
        for c in PRINTABLE_MIN..=PRINTABLE_MAX {
            for ks in [0u8, 1, 94, 95, 96, 200, 255] {
                let ct = encrypt(c, ks).unwrap();
                assert!((PRINTABLE_MIN..=PRINTABLE_MAX).contains(&ct));
            }
        }
    }

    #[test]
    fn full_residue_classes_agree() {
        // ks and ks mod 95 encrypt identically
        assert_eq!(encrypt(b'k', 6).unwrap(), encrypt(b'k', 101).unwrap());
        assert_eq!(encrypt(b'k', 6).unwrap(), encrypt(b'k', 196).unwrap());
    }
}
