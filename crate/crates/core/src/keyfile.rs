//! Key files: common header followed by a single KEY frame.
//!
//! KEY payload: `flags (1) ∥ public material [∥ secret material]`, where bit 0
//! of `flags` marks a secret-bearing file. Public material is `A ∥ b ∥ p` for
//! the 3-pass scheme and `A ∥ A⊥ ∥ y ∥ b ∥ p` for the 5-pass scheme (`p` as
//! u32 BE, matrices row-major); secret material is `s ∥ e`.

use std::path::Path;

use crate::cve::{self, CvePublicKey, CveSecretKey};
use crate::error::{Error, Result};
use crate::field::FqMatrix;
use crate::params::Params;
use crate::stern::{self, SternPublicKey, SternSecretKey};
use crate::wire::{
    decode_message, read_file_header, write_file_header, MessageType, Reader, SchemeId,
    WireMessage,
};

const FLAG_SECRET: u8 = 0x01;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PublicKey {
    Stern(SternPublicKey),
    Cve(CvePublicKey),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SecretKey {
    Stern(SternSecretKey),
    Cve(CveSecretKey),
}

impl PublicKey {
    pub fn scheme(&self) -> SchemeId {
        match self {
            PublicKey::Stern(_) => SchemeId::Stern,
            PublicKey::Cve(_) => SchemeId::Cve,
        }
    }

    pub fn weight(&self) -> usize {
        match self {
            PublicKey::Stern(pk) => pk.p,
            PublicKey::Cve(pk) => pk.p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyFile {
    pub params: Params,
    pub public: PublicKey,
    pub secret: Option<SecretKey>,
}

fn write_matrix(out: &mut Vec<u8>, a: &FqMatrix) {
    for &x in a.entries() {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

fn read_matrix(r: &mut Reader<'_>, q: u16, rows: usize, cols: usize) -> Result<FqMatrix> {
    let raw = r.take(2 * rows * cols)?;
    let entries = raw
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect();
    FqMatrix::new(q, rows, cols, entries)
}

impl KeyFile {
    pub fn scheme(&self) -> SchemeId {
        self.public.scheme()
    }

    pub fn has_secret(&self) -> bool {
        self.secret.is_some()
    }

    /// Copy with the secret stripped.
    pub fn public_only(&self) -> KeyFile {
        KeyFile {
            params: self.params.clone(),
            public: self.public.clone(),
            secret: None,
        }
    }

    pub fn stern_keys(&self) -> Result<(&SternPublicKey, Option<&SternSecretKey>)> {
        match (&self.public, &self.secret) {
            (PublicKey::Stern(pk), None) => Ok((pk, None)),
            (PublicKey::Stern(pk), Some(SecretKey::Stern(sk))) => Ok((pk, Some(sk))),
            _ => Err(Error::Precondition("not a 3-pass key".into())),
        }
    }

    pub fn cve_keys(&self) -> Result<(&CvePublicKey, Option<&CveSecretKey>)> {
        match (&self.public, &self.secret) {
            (PublicKey::Cve(pk), None) => Ok((pk, None)),
            (PublicKey::Cve(pk), Some(SecretKey::Cve(sk))) => Ok((pk, Some(sk))),
            _ => Err(Error::Precondition("not a 5-pass key".into())),
        }
    }

    /// Shape and consistency checks run on every load.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let (n, m, q) = (self.params.n, self.params.m, self.params.q);
        let shape = |rows: usize, cols: usize, a: &FqMatrix| -> Result<()> {
            if a.rows() != rows || a.cols() != cols || a.modulus() != q {
                return Err(Error::Malformed("key matrix shape mismatch".into()));
            }
            Ok(())
        };
        let p = self.public.weight();
        if p == 0 || p >= n {
            return Err(Error::Malformed(format!("weight {p} out of range")));
        }
        match &self.public {
            PublicKey::Stern(pk) => {
                shape(n, m, &pk.a)?;
                if pk.b.len() != n {
                    return Err(Error::Malformed("b has wrong length".into()));
                }
            }
            PublicKey::Cve(pk) => {
                shape(n, m, &pk.a)?;
                shape(n - m, n, &pk.aperp)?;
                if pk.b.len() != n || pk.y.len() != n - m {
                    return Err(Error::Malformed("key vector has wrong length".into()));
                }
                if !cve::public_key_consistent(pk)? {
                    return Err(Error::Malformed("syndrome matrix inconsistent with A".into()));
                }
            }
        }
        let ok = match (&self.public, &self.secret) {
            (_, None) => true,
            (PublicKey::Stern(pk), Some(SecretKey::Stern(sk))) => stern::keys_match(pk, sk),
            (PublicKey::Cve(pk), Some(SecretKey::Cve(sk))) => cve::keys_match(pk, sk),
            _ => false,
        };
        if !ok {
            return Err(Error::Malformed("secret key does not match public key".into()));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut body = vec![if self.has_secret() { FLAG_SECRET } else { 0 }];
        match &self.public {
            PublicKey::Stern(pk) => {
                write_matrix(&mut body, &pk.a);
                pk.b.write_bytes(&mut body);
                body.extend_from_slice(&(pk.p as u32).to_be_bytes());
            }
            PublicKey::Cve(pk) => {
                write_matrix(&mut body, &pk.a);
                write_matrix(&mut body, &pk.aperp);
                pk.y.write_bytes(&mut body);
                pk.b.write_bytes(&mut body);
                body.extend_from_slice(&(pk.p as u32).to_be_bytes());
            }
        }
        match &self.secret {
            Some(SecretKey::Stern(SternSecretKey { s, e }))
            | Some(SecretKey::Cve(CveSecretKey { s, e })) => {
                s.write_bytes(&mut body);
                e.write_bytes(&mut body);
            }
            None => {}
        }
        let mut out = Vec::new();
        write_file_header(&mut out, self.scheme(), &self.params);
        out.extend_from_slice(&crate::wire::encode_message(&WireMessage::new(
            MessageType::Key,
            body,
        )));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<KeyFile> {
        let (scheme, params, rest) = read_file_header(bytes)?;
        let frame = decode_message(rest)?;
        if frame.kind != MessageType::Key {
            return Err(Error::Malformed(format!("expected KEY frame, got {:?}", frame.kind)));
        }
        let (n, m, q) = (params.n, params.m, params.q);
        let mut r = Reader::new(&frame.payload);
        let flags = r.u8()?;
        if flags & !FLAG_SECRET != 0 {
            return Err(Error::Malformed(format!("unknown key flags {flags:#04x}")));
        }
        let public = match scheme {
            SchemeId::Stern => PublicKey::Stern(SternPublicKey {
                a: read_matrix(&mut r, q, n, m)?,
                b: r.vector(&params, n)?,
                p: r.u32()? as usize,
            }),
            SchemeId::Cve => PublicKey::Cve(CvePublicKey {
                a: read_matrix(&mut r, q, n, m)?,
                aperp: read_matrix(&mut r, q, n - m, n)?,
                y: r.vector(&params, n - m)?,
                b: r.vector(&params, n)?,
                p: r.u32()? as usize,
            }),
        };
        let secret = if flags & FLAG_SECRET != 0 {
            let s = r.vector(&params, m)?;
            let e = r.vector(&params, n)?;
            Some(match scheme {
                SchemeId::Stern => SecretKey::Stern(SternSecretKey { s, e }),
                SchemeId::Cve => SecretKey::Cve(CveSecretKey { s, e }),
            })
        } else {
            None
        };
        r.finish()?;
        let kf = KeyFile {
            params,
            public,
            secret,
        };
        kf.validate()?;
        Ok(kf)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<KeyFile> {
        KeyFile::from_bytes(&std::fs::read(path)?)
    }

    /// Loads a prover identity; public-only files are refused.
    pub fn load_prover(path: impl AsRef<Path>) -> Result<KeyFile> {
        let kf = KeyFile::load(path)?;
        if !kf.has_secret() {
            return Err(Error::Precondition(
                "key file holds no secret; cannot act as prover".into(),
            ));
        }
        Ok(kf)
    }

    /// Loads a verifier key; secret-bearing files are refused so that the
    /// verifier never holds `s` or `e`.
    pub fn load_verifier(path: impl AsRef<Path>) -> Result<KeyFile> {
        let bytes = std::fs::read(path)?;
        let (_, _, rest) = read_file_header(&bytes)?;
        if rest.len() > 5 && rest[5] & FLAG_SECRET != 0 {
            return Err(Error::Precondition(
                "key file holds secret material; give the verifier the public file".into(),
            ));
        }
        KeyFile::from_bytes(&bytes)
    }
}
