#include "reviewchain/types.hpp"

namespace reviewchain {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroSupply:
      return "ZeroSupply";
    case ErrorCode::ZeroAmount:
      return "ZeroAmount";
    case ErrorCode::ZeroStake:
      return "ZeroStake";
    case ErrorCode::InsufficientFunds:
      return "InsufficientFunds";
    case ErrorCode::BadSignature:
      return "BadSignature";
    case ErrorCode::UnknownAddress:
      return "UnknownAddress";
    case ErrorCode::PayoutMismatch:
      return "PayoutMismatch";
    case ErrorCode::AlreadyTerminal:
      return "AlreadyTerminal";
    case ErrorCode::UnknownEscrow:
      return "UnknownEscrow";
    case ErrorCode::InvalidProfile:
      return "InvalidProfile";
    case ErrorCode::MalformedComponent:
      return "MalformedComponent";
    case ErrorCode::GenesisExists:
      return "GenesisExists";
    case ErrorCode::UnconfirmedCitation:
      return "UnconfirmedCitation";
    case ErrorCode::NoCitations:
      return "NoCitations";
    case ErrorCode::SharesDontSumToOne:
      return "SharesDontSumToOne";
    case ErrorCode::MissingSignature:
      return "MissingSignature";
    case ErrorCode::LockedManuscript:
      return "LockedManuscript";
    case ErrorCode::NotUnderReview:
      return "NotUnderReview";
    case ErrorCode::NoReviewContract:
      return "NoReviewContract";
    case ErrorCode::ReviewerIsAuthor:
      return "ReviewerIsAuthor";
    case ErrorCode::UnknownManuscript:
      return "UnknownManuscript";
    case ErrorCode::InvalidShares:
      return "InvalidShares";
    case ErrorCode::InvalidTerms:
      return "InvalidTerms";
    case ErrorCode::UnknownParty:
      return "UnknownParty";
    case ErrorCode::UnknownContract:
      return "UnknownContract";
    case ErrorCode::NotAParty:
      return "NotAParty";
    case ErrorCode::AlreadyActive:
      return "AlreadyActive";
    case ErrorCode::AlreadyLocked:
      return "AlreadyLocked";
    case ErrorCode::StateMismatch:
      return "StateMismatch";
    case ErrorCode::EmptyPool:
      return "EmptyPool";
    case ErrorCode::NotConfirmed:
      return "NotConfirmed";
    case ErrorCode::InvalidPolicy:
      return "InvalidPolicy";
    case ErrorCode::ParseError:
      return "ParseError";
    case ErrorCode::UnknownFormat:
      return "UnknownFormat";
    case ErrorCode::UnknownEntity:
      return "UnknownEntity";
    case ErrorCode::IoError:
      return "IoError";
  }
  return "Unknown";
}

}  // namespace reviewchain
