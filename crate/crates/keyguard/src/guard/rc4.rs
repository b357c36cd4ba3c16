//! RC4 stream cipher: key scheduling plus the pseudo-random generation
//! stage. One keystream byte is drawn per encrypted character.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Rc4 {
    s: [u8; 256],
    i: u8,
    j: u8,
}

impl Rc4 {
    /// Key scheduling. Keys are 1..=256 bytes.
    pub fn new(key: &[u8]) -> Result<Rc4> {
        if key.is_empty() {
            return Err(Error::EmptyKey);
        }
        if key.len() > 256 {
            return Err(Error::KeyTooLong(key.len()));
        }
        let mut s = [0u8; 256];
        for (i, v) in s.iter_mut().enumerate() {
            *v = i as u8;
        }
        let mut j = 0u8;
        for i in 0..256 {
            j = j
                .wrapping_add(s[i])
                .wrapping_add(key[i % key.len()]);
            s.swap(i, j as usize);
        }
        Ok(Rc4 { s, i: 0, j: 0 })
    }

    /// One PRGA step.
    pub fn next_byte(&mut self) -> u8 {
        self.i = self.i.wrapping_add(1);
        self.j = self.j.wrapping_add(self.s[self.i as usize]);
        self.s.swap(self.i as usize, self.j as usize);
        let idx = self.s[self.i as usize].wrapping_add(self.s[self.j as usize]);
        self.s[idx as usize]
    }

    /// Internal permutation, exposed for state checks in tests.
    pub fn state(&self) -> &[u8; 256] {
        &self.s
    }
}

/// First `n` bytes of the keystream after scheduling `key`.
pub fn keystream(key: &[u8], n: usize) -> Result<Vec<u8>> {
    let mut rc4 = Rc4::new(key)?;
    Ok((0..n).map(|_| rc4.next_byte()).collect())
}
