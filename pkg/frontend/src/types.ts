export interface DialogueTurn {
  speaker: string;
  message: string;
}

export interface Candidate {
  text: string;
  temperature: number;
  features: number[];
  score: number;
}

export interface MessageReply {
  response: string;
  action: number[];
  candidates: Candidate[];
  selected_index: number;
}

export interface UiSession {
  session_id: string;
  transcript: DialogueTurn[];
  last_action: number[];
  last_candidates: (Candidate & { selected: boolean })[];
}
