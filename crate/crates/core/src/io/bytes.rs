use super::FormatError;

/// Little-endian cursor that names the array it ran out of.
pub(crate) struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    pub fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], FormatError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len());
        let end = end.ok_or(FormatError::Truncated { array: what })?;
        let out = &self.data[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    pub fn magic(&mut self, magic: &'static str) -> Result<(), FormatError> {
        match self.take(magic.len(), "magic") {
            Ok(m) if m == magic.as_bytes() => Ok(()),
            _ => Err(FormatError::BadMagic { expected: magic }),
        }
    }

    pub fn u16(&mut self, what: &'static str) -> Result<u16, FormatError> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    pub fn u32(&mut self, what: &'static str) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    pub fn f32s(&mut self, count: usize, what: &'static str) -> Result<Vec<f32>, FormatError> {
        let n = count
            .checked_mul(4)
            .ok_or(FormatError::Truncated { array: what })?;
        Ok(self
            .take(n, what)?
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect())
    }

    pub fn u32s(&mut self, count: usize, what: &'static str) -> Result<Vec<u32>, FormatError> {
        let n = count
            .checked_mul(4)
            .ok_or(FormatError::Truncated { array: what })?;
        Ok(self
            .take(n, what)?
            .chunks_exact(4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
            .collect())
    }

    pub fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    pub fn finish(&self) -> Result<(), FormatError> {
        if self.remaining() != 0 {
            return Err(FormatError::DimInconsistency(format!(
                "{} trailing bytes after the last array",
                self.remaining()
            )));
        }
        Ok(())
    }
}

pub(crate) fn put_f32s<'a>(out: &mut Vec<u8>, values: impl IntoIterator<Item = &'a f32>) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub(crate) fn put_u32s<'a>(out: &mut Vec<u8>, values: impl IntoIterator<Item = &'a u32>) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub(crate) fn chunk3<T: Copy>(v: &[T]) -> Vec<[T; 3]> {
    v.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect()
}

pub(crate) fn chunk4<T: Copy>(v: &[T]) -> Vec<[T; 4]> {
    v.chunks_exact(4)
        .map(|c| [c[0], c[1], c[2], c[3]])
        .collect()
}
