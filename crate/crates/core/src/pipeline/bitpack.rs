use crate::elias::BitString;

/// Packs bits most-significant first; a trailing partial byte is held back.
#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    current: u8,
    filled: u8,
}

impl BitWriter {
    pub fn new() -> Self {
        BitWriter::default()
    }

    pub fn push(&mut self, bit: bool) {
        self.current = (self.current << 1) | u8::from(bit);
        self.filled += 1;
        if self.filled == 8 {
            self.bytes.push(self.current);
            self.current = 0;
            self.filled = 0;
        }
    }

    pub fn extend(&mut self, bits: &BitString) {
        for &b in bits.bits() {
            self.push(b);
        }
    }

    pub fn bit_len(&self) -> usize {
        self.bytes.len() * 8 + usize::from(self.filled)
    }

    /// Complete bytes and the withheld trailing bits.
    pub fn finish(self) -> (Vec<u8>, BitString) {
        let withheld = (0..self.filled).rev().map(|i| (self.current >> i) & 1 == 1).collect();
        (self.bytes, BitString::from_bits(withheld))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_bits_make_one_byte_and_four_withheld() {
        let mut w = BitWriter::new();
        w.extend(&"110010101111".parse().unwrap());
        assert_eq!(w.bit_len(), 12);
        let (bytes, rest) = w.finish();
        assert_eq!(bytes, vec![0b1100_1010]);
        assert_eq!(rest.to_string(), "1111");
    }

    #[test]
    fn carries_across_pushes() {
        let mut w = BitWriter::new();
        w.extend(&"101".parse().unwrap());
        w.extend(&"01010".parse().unwrap());
        let (bytes, rest) = w.finish();
        assert_eq!(bytes, vec![0b1010_1010]);
        assert!(rest.is_empty());
    }
}
